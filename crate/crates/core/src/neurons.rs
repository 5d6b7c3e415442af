//! Neuron configurations: `N` weight vectors in `R^(d+1)`.
//!
//! Vectors are stored row-major in one flat buffer. A [`NeuronSet`] always
//! holds at least one vector, every vector has the same length (>= 2), every
//! component is finite and every vector has norm strictly above
//! [`NORM_EPSILON`].

use serde::{Deserialize, Serialize};

use crate::error::{MheError, Result};

/// Norms at or below this value are treated as zero.
pub const NORM_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct NeuronSet {
    data: Vec<f64>,
    dim: usize,
}

impl NeuronSet {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map(Vec::len).ok_or(MheError::TooFewNeurons {
            required: 1,
            found: 0,
        })?;
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in &rows {
            if row.len() != dim {
                return Err(MheError::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_flat(data, dim)
    }

    /// Builds a set from a row-major buffer of `count * dim` values.
    pub fn from_flat(data: Vec<f64>, dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(MheError::DimensionMismatch {
                expected: 2,
                found: dim,
            });
        }
        if data.is_empty() {
            return Err(MheError::TooFewNeurons {
                required: 1,
                found: 0,
            });
        }
        if data.len() % dim != 0 {
            return Err(MheError::DimensionMismatch {
                expected: dim,
                found: data.len() % dim,
            });
        }
        for (index, row) in data.chunks_exact(dim).enumerate() {
            if row.iter().any(|v| !v.is_finite()) {
                return Err(MheError::NonFiniteWeight { index });
            }
            if norm(row) <= NORM_EPSILON {
                return Err(MheError::ZeroNormNeuron { index });
            }
        }
        Ok(NeuronSet { data, dim })
    }

    /// Ambient dimension `d + 1`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    pub fn norms(&self) -> Vec<f64> {
        self.rows().map(norm).collect()
    }

    /// Projects every vector onto the unit sphere, preserving direction.
    pub fn normalized(&self) -> NeuronSet {
        let mut data = self.data.clone();
        for row in data.chunks_exact_mut(self.dim) {
            let r = norm(row);
            row.iter_mut().for_each(|v| *v /= r);
        }
        NeuronSet {
            data,
            dim: self.dim,
        }
    }

    /// The originals followed by their negations, in the same order.
    pub fn half_space_expand(&self) -> NeuronSet {
        let mut data = Vec::with_capacity(2 * self.data.len());
        data.extend_from_slice(&self.data);
        data.extend(self.data.iter().map(|v| -v));
        NeuronSet {
            data,
            dim: self.dim,
        }
    }

    /// Sub-set indexed by `indices` (order kept, no range check beyond the
    /// slice bounds).
    pub fn select(&self, indices: &[usize]) -> Result<NeuronSet> {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            if i >= self.count() {
                return Err(MheError::BatchIndexOutOfRange {
                    index: i,
                    count: self.count(),
                });
            }
            data.extend_from_slice(self.row(i));
        }
        NeuronSet::from_flat(data, self.dim)
    }

    /// Minimum pairwise geodesic distance (radians) between the normalized
    /// vectors. Returns `+inf` for a single vector.
    pub fn min_pairwise_angle(&self) -> f64 {
        let unit = self.normalized();
        let n = unit.count();
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in i + 1..n {
                best = best.min(geodesic(unit.row(i), unit.row(j)));
            }
        }
        best
    }
}

impl TryFrom<Vec<Vec<f64>>> for NeuronSet {
    type Error = MheError;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        NeuronSet::new(rows)
    }
}

impl From<NeuronSet> for Vec<Vec<f64>> {
    fn from(set: NeuronSet) -> Self {
        set.to_rows()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Angle between two unit vectors, with the inner product clamped to
/// `[-1, 1]`.
pub fn geodesic(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b).clamp(-1.0, 1.0).acos()
}

/// Removes the component of `g` along the unit vector `u` and divides by the
/// original norm `r`: the Jacobian of `w -> w / |w|` applied to `g`.
pub(crate) fn project_tangent(g: &mut [f64], u: &[f64], r: f64) {
    let radial = dot(g, u);
    for (gk, uk) in g.iter_mut().zip(u) {
        *gk = (*gk - radial * uk) / r;
    }
}

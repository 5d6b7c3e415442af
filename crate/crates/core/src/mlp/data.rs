use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{MheError, Result};
use crate::neurons::{norm, NORM_EPSILON};

/// Labelled points with per-class counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDataset")]
pub struct SyntheticDataset {
    points: Vec<Vec<f64>>,
    labels: Vec<usize>,
    class_counts: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDataset {
    points: Vec<Vec<f64>>,
    labels: Vec<usize>,
    class_counts: Vec<usize>,
}

impl TryFrom<RawDataset> for SyntheticDataset {
    type Error = MheError;

    fn try_from(raw: RawDataset) -> Result<Self> {
        let data = SyntheticDataset::new(raw.points, raw.labels, raw.class_counts.len())?;
        if data.class_counts != raw.class_counts {
            return Err(MheError::InvalidConfig(
                "class_counts disagree with labels".into(),
            ));
        }
        Ok(data)
    }
}

impl SyntheticDataset {
    pub fn new(points: Vec<Vec<f64>>, labels: Vec<usize>, classes: usize) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(MheError::DimensionMismatch {
                expected: points.len(),
                found: labels.len(),
            });
        }
        if let Some(first) = points.first() {
            if let Some(bad) = points.iter().find(|p| p.len() != first.len()) {
                return Err(MheError::DimensionMismatch {
                    expected: first.len(),
                    found: bad.len(),
                });
            }
        }
        let mut class_counts = vec![0; classes];
        for &label in &labels {
            *class_counts
                .get_mut(label)
                .ok_or(MheError::LabelOutOfRange { label, classes })? += 1;
        }
        Ok(SyntheticDataset {
            points,
            labels,
            class_counts,
        })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_counts(&self) -> &[usize] {
        &self.class_counts
    }

    pub fn classes(&self) -> usize {
        self.class_counts.len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }
}

fn unit_gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let r = norm(&v);
        if r > NORM_EPSILON {
            return v.into_iter().map(|x| x / r).collect();
        }
    }
}

/// Class means drawn uniformly on the unit sphere in `R^dim`.
pub fn blob_means(classes: usize, dim: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if classes < 2 || dim == 0 {
        return Err(MheError::InvalidConfig(
            "need at least 2 classes and a positive dimension".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..classes).map(|_| unit_gaussian(&mut rng, dim)).collect())
}

/// `per_class[k]` points `mean_k + spread * z`, `z ~ N(0, I)`, stored class by
/// class.
pub fn sample_blobs(
    means: &[Vec<f64>],
    per_class: &[usize],
    spread: f64,
    seed: u64,
) -> Result<SyntheticDataset> {
    if means.len() != per_class.len() {
        return Err(MheError::DimensionMismatch {
            expected: means.len(),
            found: per_class.len(),
        });
    }
    if per_class.contains(&0) {
        return Err(MheError::InvalidConfig("class counts must be positive".into()));
    }
    if !(spread.is_finite() && spread >= 0.0) {
        return Err(MheError::InvalidConfig("spread must be >= 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(per_class.iter().sum());
    let mut labels = Vec::with_capacity(points.capacity());
    for (label, (mean, &count)) in means.iter().zip(per_class).enumerate() {
        for _ in 0..count {
            points.push(
                mean.iter()
                    .map(|m| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        m + spread * z
                    })
                    .collect(),
            );
            labels.push(label);
        }
    }
    SyntheticDataset::new(points, labels, means.len())
}

/// Gaussian blobs around `classes` random unit means, with `per_class[k]`
/// samples in class `k`. Means come from `seed`, samples from `seed + 1`, so
/// a matching test set is `sample_blobs(&blob_means(classes, dim, seed)?,
/// counts, spread, other_seed)`.
pub fn make_imbalanced_blobs(
    classes: usize,
    per_class: &[usize],
    dim: usize,
    spread: f64,
    seed: u64,
) -> Result<SyntheticDataset> {
    if per_class.len() != classes {
        return Err(MheError::DimensionMismatch {
            expected: classes,
            found: per_class.len(),
        });
    }
    let means = blob_means(classes, dim, seed)?;
    sample_blobs(&means, per_class, spread, seed.wrapping_add(1))
}

//! Hyperspherical energies and their analytic gradients.
//!
//! For unit vectors `u_i = w_i / |w_i|` the energy is the sum over *ordered*
//! pairs `i != j` of `f_s(dist(p_i, p_j))`, where `f_s(z) = z^-s` for `s > 0`
//! and `f_0(z) = log(1/z)`. The points `p_i` are the unit vectors, optionally
//! scaled by per-neuron weights `beta_i` and optionally extended with their
//! negations (half-space mode). Distance is either the chord `|p_i - p_j|`
//! or the angle `acos(p_i . p_j)`.
//!
//! Gradients are taken with respect to the unnormalized weights `w_i`, so
//! every per-neuron gradient is orthogonal to `w_i`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{MheError, Result};
use crate::neurons::{distance, dot, project_tangent, NeuronSet, NORM_EPSILON};
use crate::serde_ext::ext_real;

/// Inner products are clamped to `[-1 + COS_CLAMP, 1 - COS_CLAMP]` before
/// `acos` in geodesic mode.
pub const COS_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    #[default]
    Euclidean,
    Geodesic,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    #[default]
    Full,
    /// Each neuron is paired with a virtual neuron pointing the opposite way.
    Half,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerRole {
    Hidden,
    Output,
}

fn default_power() -> f64 {
    2.0
}

/// Selects one energy variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergySpec {
    /// Riesz power; `0` selects the logarithmic kernel.
    #[serde(default = "default_power")]
    pub s: f64,
    #[serde(default)]
    pub distance: Distance,
    #[serde(default)]
    pub space: Space,
    /// Per-neuron weights (euclidean distance only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
}

impl Default for EnergySpec {
    fn default() -> Self {
        EnergySpec::riesz(default_power())
    }
}

impl EnergySpec {
    /// Full-space euclidean energy with power `s`.
    pub fn riesz(s: f64) -> Self {
        EnergySpec {
            s,
            distance: Distance::Euclidean,
            space: Space::Full,
            beta: None,
        }
    }

    pub fn with_distance(mut self, distance: Distance) -> Self {
        self.distance = distance;
        self
    }

    pub fn with_space(mut self, space: Space) -> Self {
        self.space = space;
        self
    }

    pub fn with_beta(mut self, beta: Vec<f64>) -> Self {
        self.beta = Some(beta);
        self
    }

    /// Number of points after half-space expansion.
    pub fn effective_count(&self, n: usize) -> usize {
        match self.space {
            Space::Full => n,
            Space::Half => 2 * n,
        }
    }

    fn check_count(&self, n: usize) -> Result<()> {
        if n < 2 {
            return Err(MheError::TooFewNeurons {
                required: 2,
                found: n,
            });
        }
        match &self.beta {
            Some(beta) if beta.len() != n => Err(MheError::BetaLengthMismatch {
                expected: n,
                found: beta.len(),
            }),
            _ => Ok(()),
        }
    }
}

/// Checks that `spec` is usable for a layer in the given role.
pub fn validate_spec(spec: &EnergySpec, role: LayerRole) -> Result<()> {
    if !(spec.s.is_finite() && spec.s >= 0.0) {
        return Err(MheError::InvalidPower(spec.s));
    }
    if spec.space == Space::Half && role == LayerRole::Output {
        return Err(MheError::HalfSpaceOnOutput);
    }
    if let Some(beta) = &spec.beta {
        if spec.distance == Distance::Geodesic {
            return Err(MheError::GeodesicWithBeta);
        }
        if let Some(index) = beta.iter().position(|b| !(b.is_finite() && *b > 0.0)) {
            return Err(MheError::NonPositiveBeta { index });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyValue {
    /// Sum over ordered pairs; `+inf` when two points coincide.
    #[serde(with = "ext_real")]
    pub total: f64,
    /// `M (M - 1)` with `M` the effective point count.
    pub pair_count: usize,
    /// `total / pair_count`.
    #[serde(with = "ext_real")]
    pub normalized: f64,
}

impl EnergyValue {
    fn new(total: f64, points: usize) -> Self {
        let pair_count = points * (points - 1);
        EnergyValue {
            total,
            pair_count,
            normalized: total / pair_count as f64,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.total.is_finite()
    }
}

pub(crate) fn kernel(s: f64, z: f64) -> f64 {
    if s == 0.0 {
        -z.ln()
    } else {
        z.powf(-s)
    }
}

fn kernel_slope(s: f64, z: f64) -> f64 {
    if s == 0.0 {
        -1.0 / z
    } else {
        -s * z.powf(-s - 1.0)
    }
}

enum PairDistance {
    Coincident,
    Chord(f64),
    Angle { theta: f64, cos: f64, clamped: bool },
}

impl PairDistance {
    fn measure(mode: Distance, a: &[f64], b: &[f64]) -> Self {
        let chord = distance(a, b);
        if chord <= NORM_EPSILON {
            return PairDistance::Coincident;
        }
        match mode {
            Distance::Euclidean => PairDistance::Chord(chord),
            Distance::Geodesic => {
                let raw = dot(a, b);
                let cos = raw.clamp(-1.0 + COS_CLAMP, 1.0 - COS_CLAMP);
                PairDistance::Angle {
                    theta: cos.acos(),
                    cos,
                    clamped: cos != raw,
                }
            }
        }
    }

    fn value(&self) -> Option<f64> {
        match *self {
            PairDistance::Coincident => None,
            PairDistance::Chord(d) => Some(d),
            PairDistance::Angle { theta, .. } => Some(theta),
        }
    }

    /// Adds `weight * f_s'(D) * dD/da` to `ga` and the `b` counterpart to `gb`.
    fn accumulate(
        &self,
        s: f64,
        weight: f64,
        a: &[f64],
        b: &[f64],
        ga: &mut [f64],
        gb: &mut [f64],
    ) -> Result<()> {
        match *self {
            PairDistance::Coincident => Err(MheError::NonFiniteEnergy),
            PairDistance::Chord(d) => {
                let c = weight * kernel_slope(s, d) / d;
                for k in 0..a.len() {
                    let diff = c * (a[k] - b[k]);
                    ga[k] += diff;
                    gb[k] -= diff;
                }
                Ok(())
            }
            PairDistance::Angle { theta, cos, clamped } => {
                if clamped {
                    return Ok(());
                }
                let c = -weight * kernel_slope(s, theta) / (1.0 - cos * cos).sqrt();
                for k in 0..a.len() {
                    ga[k] += c * b[k];
                    gb[k] += c * a[k];
                }
                Ok(())
            }
        }
    }
}

/// The points the energy is evaluated on, with the map back to neurons.
struct PointCloud {
    points: Vec<f64>,
    dim: usize,
    /// Source neuron of each point.
    source: Vec<usize>,
    /// `p = coef * u_source`.
    coef: Vec<f64>,
}

impl PointCloud {
    fn build(unit: &NeuronSet, spec: &EnergySpec) -> Self {
        let n = unit.count();
        let dim = unit.dim();
        let m = spec.effective_count(n);
        let mut points = Vec::with_capacity(m * dim);
        let mut source = Vec::with_capacity(m);
        let mut coef = Vec::with_capacity(m);
        let signs: &[f64] = match spec.space {
            Space::Full => &[1.0],
            Space::Half => &[1.0, -1.0],
        };
        for &sign in signs {
            for (i, u) in unit.rows().enumerate() {
                let c = match &spec.beta {
                    Some(beta) => sign * beta[i],
                    None => sign,
                };
                points.extend(u.iter().map(|v| c * v));
                source.push(i);
                coef.push(c);
            }
        }
        PointCloud {
            points,
            dim,
            source,
            coef,
        }
    }

    fn len(&self) -> usize {
        self.source.len()
    }

    fn point(&self, k: usize) -> &[f64] {
        &self.points[k * self.dim..(k + 1) * self.dim]
    }

    /// Pulls per-point gradients back to the unnormalized weights.
    fn pull_back(&self, point_grad: &[f64], neurons: &NeuronSet, unit: &NeuronSet) -> Vec<f64> {
        let dim = self.dim;
        let mut grad = vec![0.0; neurons.count() * dim];
        for k in 0..self.len() {
            let i = self.source[k];
            let c = self.coef[k];
            for (g, p) in grad[i * dim..(i + 1) * dim]
                .iter_mut()
                .zip(&point_grad[k * dim..(k + 1) * dim])
            {
                *g += c * p;
            }
        }
        for (i, r) in neurons.norms().into_iter().enumerate() {
            project_tangent(&mut grad[i * dim..(i + 1) * dim], unit.row(i), r);
        }
        grad
    }
}

fn rows(flat: Vec<f64>, dim: usize) -> Vec<Vec<f64>> {
    flat.chunks_exact(dim).map(<[f64]>::to_vec).collect()
}

fn prepare(neurons: &NeuronSet, spec: &EnergySpec) -> Result<(NeuronSet, PointCloud)> {
    validate_spec(spec, LayerRole::Hidden)?;
    spec.check_count(neurons.count())?;
    let unit = neurons.normalized();
    let cloud = PointCloud::build(&unit, spec);
    Ok((unit, cloud))
}

/// Smallest euclidean distance between two points of the (expanded, weighted)
/// point cloud.
pub fn min_pair_distance(neurons: &NeuronSet, spec: &EnergySpec) -> Result<f64> {
    let (_, cloud) = prepare(neurons, spec)?;
    let m = cloud.len();
    let mut best = f64::INFINITY;
    for k in 0..m {
        for l in k + 1..m {
            best = best.min(distance(cloud.point(k), cloud.point(l)));
        }
    }
    Ok(best)
}

/// Hyperspherical energy of `neurons` under `spec`.
pub fn energy(neurons: &NeuronSet, spec: &EnergySpec) -> Result<EnergyValue> {
    let (_, cloud) = prepare(neurons, spec)?;
    let m = cloud.len();
    let mut half_sum = 0.0;
    for k in 0..m {
        for l in k + 1..m {
            match PairDistance::measure(spec.distance, cloud.point(k), cloud.point(l)).value() {
                Some(d) => half_sum += kernel(spec.s, d),
                None => return Ok(EnergyValue::new(f64::INFINITY, m)),
            }
        }
    }
    Ok(EnergyValue::new(2.0 * half_sum, m))
}

pub(crate) fn energy_gradient_flat(neurons: &NeuronSet, spec: &EnergySpec) -> Result<Vec<f64>> {
    let (unit, cloud) = prepare(neurons, spec)?;
    let m = cloud.len();
    let dim = cloud.dim;
    let mut point_grad = vec![0.0; m * dim];
    for k in 0..m {
        for l in k + 1..m {
            let (a, b) = (cloud.point(k), cloud.point(l));
            let pair = PairDistance::measure(spec.distance, a, b);
            let (head, tail) = point_grad.split_at_mut(l * dim);
            // Each unordered pair appears twice in the ordered sum.
            pair.accumulate(
                spec.s,
                2.0,
                a,
                b,
                &mut head[k * dim..(k + 1) * dim],
                &mut tail[..dim],
            )?;
        }
    }
    Ok(cloud.pull_back(&point_grad, neurons, &unit))
}

/// `dE/dw_i` for every unnormalized weight vector.
pub fn energy_gradient(neurons: &NeuronSet, spec: &EnergySpec) -> Result<Vec<Vec<f64>>> {
    Ok(rows(energy_gradient_flat(neurons, spec)?, neurons.dim()))
}

fn check_batch(batch: &[usize], count: usize) -> Result<()> {
    if batch.len() < 2 {
        return Err(MheError::BatchTooSmall { size: batch.len() });
    }
    let mut seen = vec![false; count];
    for &index in batch {
        if index >= count {
            return Err(MheError::BatchIndexOutOfRange { index, count });
        }
        if std::mem::replace(&mut seen[index], true) {
            return Err(MheError::DuplicateBatchIndex { index });
        }
    }
    Ok(())
}

fn restrict(neurons: &NeuronSet, spec: &EnergySpec, batch: &[usize]) -> Result<(NeuronSet, EnergySpec)> {
    check_batch(batch, neurons.count())?;
    spec.check_count(neurons.count())?;
    let sub = neurons.select(batch)?;
    let mut sub_spec = spec.clone();
    if let Some(beta) = &spec.beta {
        sub_spec.beta = Some(batch.iter().map(|&i| beta[i]).collect());
    }
    Ok((sub, sub_spec))
}

/// Energy of the neurons indexed by `batch` (distinct indices, at least 2).
pub fn minibatch_energy(
    neurons: &NeuronSet,
    spec: &EnergySpec,
    batch: &[usize],
) -> Result<EnergyValue> {
    let (sub, sub_spec) = restrict(neurons, spec, batch)?;
    energy(&sub, &sub_spec)
}

/// Gradient of [`minibatch_energy`] for all `N` neurons (zero outside the
/// batch). Over uniformly drawn batches of size `b` its mean is
/// `b (b - 1) / (N (N - 1))` times the full gradient.
pub fn minibatch_gradient(
    neurons: &NeuronSet,
    spec: &EnergySpec,
    batch: &[usize],
) -> Result<Vec<Vec<f64>>> {
    let (sub, sub_spec) = restrict(neurons, spec, batch)?;
    let sub_grad = energy_gradient_flat(&sub, &sub_spec)?;
    let dim = neurons.dim();
    let mut grad = vec![vec![0.0; dim]; neurons.count()];
    for (slot, &i) in batch.iter().enumerate() {
        grad[i].copy_from_slice(&sub_grad[slot * dim..(slot + 1) * dim]);
    }
    Ok(grad)
}

/// Draws `size` distinct indices from `0..count`.
pub fn sample_batch<R: Rng + ?Sized>(rng: &mut R, count: usize, size: usize) -> Result<Vec<usize>> {
    if size < 2 {
        return Err(MheError::BatchTooSmall { size });
    }
    if size > count {
        return Err(MheError::InvalidConfig(format!(
            "batch size {size} exceeds neuron count {count}"
        )));
    }
    Ok(rand::seq::index::sample(rng, count, size).into_vec())
}

fn output_minibatch(
    neurons: &NeuronSet,
    labels: &[usize],
    spec: &EnergySpec,
    with_grad: bool,
) -> Result<(f64, Option<Vec<f64>>)> {
    validate_spec(spec, LayerRole::Output)?;
    let n = neurons.count();
    spec.check_count(n)?;
    if labels.is_empty() {
        return Err(MheError::EmptyBatch);
    }
    if let Some(&label) = labels.iter().find(|&&y| y >= n) {
        return Err(MheError::LabelOutOfRange { label, classes: n });
    }
    let unit = neurons.normalized();
    let cloud = PointCloud::build(&unit, spec);
    let dim = cloud.dim;
    let scale = 1.0 / (labels.len() * (n - 1)) as f64;
    let mut total = 0.0;
    let mut point_grad = with_grad.then(|| vec![0.0; n * dim]);
    for &y in labels {
        for j in (0..n).filter(|&j| j != y) {
            let (a, b) = (cloud.point(y), cloud.point(j));
            let pair = PairDistance::measure(spec.distance, a, b);
            if let Some(g) = &mut point_grad {
                let mut ga = vec![0.0; dim];
                let mut gb = vec![0.0; dim];
                pair.accumulate(spec.s, scale, a, b, &mut ga, &mut gb)?;
                for k in 0..dim {
                    g[y * dim + k] += ga[k];
                    g[j * dim + k] += gb[k];
                }
            }
            match pair.value() {
                Some(d) => total += kernel(spec.s, d),
                None => total = f64::INFINITY,
            }
        }
    }
    let grad = point_grad.map(|g| cloud.pull_back(&g, neurons, &unit));
    Ok((scale * total, grad))
}

/// Data-dependent output-layer energy: for each label `y` in the batch, the
/// kernel between classifier neuron `y` and every other classifier neuron,
/// averaged by `m (N - 1)`.
pub fn output_minibatch_energy(
    classifier: &NeuronSet,
    labels: &[usize],
    spec: &EnergySpec,
) -> Result<f64> {
    Ok(output_minibatch(classifier, labels, spec, false)?.0)
}

/// Value and gradient of [`output_minibatch_energy`].
pub fn output_minibatch_gradient(
    classifier: &NeuronSet,
    labels: &[usize],
    spec: &EnergySpec,
) -> Result<(f64, Vec<Vec<f64>>)> {
    let (value, grad) = output_minibatch(classifier, labels, spec, true)?;
    let grad = grad.ok_or(MheError::NonFiniteEnergy)?;
    Ok((value, rows(grad, classifier.dim())))
}

/// `sum_{i != j} log f_s(dist)`, the logarithmic surrogate of `E_s`. For
/// `f_s(z) = z^-s` this equals `s * E_0`. Requires `s > 0`.
pub fn log_surrogate_energy(neurons: &NeuronSet, spec: &EnergySpec) -> Result<f64> {
    if spec.s <= 0.0 {
        return Err(MheError::InvalidPower(spec.s));
    }
    let (_, cloud) = prepare(neurons, spec)?;
    let m = cloud.len();
    let mut total = 0.0;
    for k in 0..m {
        for l in (0..m).filter(|&l| l != k) {
            match PairDistance::measure(spec.distance, cloud.point(k), cloud.point(l)).value() {
                Some(d) => total += kernel(spec.s, d).ln(),
                None => return Ok(f64::INFINITY),
            }
        }
    }
    Ok(total)
}

/// Product of euclidean distances between normalized neurons over ordered
/// pairs.
pub fn distance_product(neurons: &NeuronSet) -> f64 {
    let unit = neurons.normalized();
    let n = unit.count();
    let mut product = 1.0;
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            product *= distance(unit.row(i), unit.row(j));
        }
    }
    product
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn set(rows: Vec<Vec<f64>>) -> NeuronSet {
        NeuronSet::new(rows).unwrap()
    }

    fn antipodal() -> NeuronSet {
        set(vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.0, -1.0]])
    }

    fn equilateral() -> NeuronSet {
        let a = 2.0 * PI / 3.0;
        set(vec![
            vec![1.0, 0.0, 0.0],
            vec![a.cos(), a.sin(), 0.0],
            vec![(2.0 * a).cos(), (2.0 * a).sin(), 0.0],
        ])
    }

    #[test]
    fn antipodal_energies() {
        let e = energy(&antipodal(), &EnergySpec::riesz(1.0)).unwrap();
        assert!((e.total - 1.0).abs() < 1e-15);
        assert_eq!(e.pair_count, 2);
        assert!((e.normalized - 0.5).abs() < 1e-15);

        let e = energy(&antipodal(), &EnergySpec::riesz(0.0)).unwrap();
        assert!((e.total - 2.0 * 0.5f64.ln()).abs() < 1e-15);
        assert!((e.total + 1.386294).abs() < 1e-6);

        let spec = EnergySpec::riesz(1.0).with_distance(Distance::Geodesic);
        let e = energy(&antipodal(), &spec).unwrap();
        // acos is evaluated at -1 + 1e-12 rather than -1.
        assert!((e.total - 2.0 / PI).abs() < 1e-6);
    }

    #[test]
    fn equilateral_energy() {
        let e = energy(&equilateral(), &EnergySpec::riesz(1.0)).unwrap();
        assert!((e.total - 6.0 / 3f64.sqrt()).abs() < 1e-12);
        assert!((e.total - 3.464102).abs() < 1e-6);
    }

    #[test]
    fn coincident_pair_is_infinite() {
        let s = set(vec![vec![1.0, 0.0], vec![2.0, 0.0], vec![0.0, 1.0]]);
        let e = energy(&s, &EnergySpec::riesz(2.0)).unwrap();
        assert_eq!(e.total, f64::INFINITY);
        for spec in [
            EnergySpec::riesz(0.0),
            EnergySpec::riesz(1.0).with_distance(Distance::Geodesic),
        ] {
            assert_eq!(energy(&s, &spec).unwrap().total, f64::INFINITY);
            assert_eq!(energy_gradient(&s, &spec), Err(MheError::NonFiniteEnergy));
        }
    }

    #[test]
    fn half_space_pair_count() {
        let spec = EnergySpec::riesz(1.0).with_space(Space::Half);
        let e = energy(&equilateral(), &spec).unwrap();
        assert_eq!(e.pair_count, 30);
        assert_eq!(e.normalized, e.total / 30.0);
    }

    #[test]
    fn antipodal_gradient_vanishes() {
        for s in [0.0, 1.0, 2.0, 3.5] {
            let g = energy_gradient(&antipodal(), &EnergySpec::riesz(s)).unwrap();
            for row in g {
                assert!(crate::neurons::norm(&row) < 1e-10);
            }
        }
    }

    #[test]
    fn validate_spec_rules() {
        let half = EnergySpec::riesz(2.0).with_space(Space::Half);
        assert_eq!(
            validate_spec(&half, LayerRole::Output),
            Err(MheError::HalfSpaceOnOutput)
        );
        assert_eq!(validate_spec(&half, LayerRole::Hidden), Ok(()));
        let geo_beta = EnergySpec::riesz(2.0)
            .with_distance(Distance::Geodesic)
            .with_beta(vec![1.0, 2.0]);
        assert_eq!(
            validate_spec(&geo_beta, LayerRole::Hidden),
            Err(MheError::GeodesicWithBeta)
        );
        assert_eq!(
            validate_spec(&EnergySpec::riesz(-1.0), LayerRole::Hidden),
            Err(MheError::InvalidPower(-1.0))
        );
        assert_eq!(
            validate_spec(&EnergySpec::riesz(1.0).with_beta(vec![1.0, 0.0]), LayerRole::Hidden),
            Err(MheError::NonPositiveBeta { index: 1 })
        );
    }

    #[test]
    fn energy_rejects_bad_specs() {
        let geo_beta = EnergySpec::riesz(2.0)
            .with_distance(Distance::Geodesic)
            .with_beta(vec![1.0, 2.0]);
        assert_eq!(energy(&antipodal(), &geo_beta), Err(MheError::GeodesicWithBeta));
        let short_beta = EnergySpec::riesz(2.0).with_beta(vec![1.0]);
        assert_eq!(
            energy(&antipodal(), &short_beta),
            Err(MheError::BetaLengthMismatch {
                expected: 2,
                found: 1
            })
        );
        let single = set(vec![vec![1.0, 0.0]]);
        assert!(matches!(
            energy(&single, &EnergySpec::riesz(1.0)),
            Err(MheError::TooFewNeurons { .. })
        ));
    }

    #[test]
    fn weighted_energy_uses_scaled_points() {
        // |2 e_z - (-e_z)| = 3 for both ordered pairs.
        let spec = EnergySpec::riesz(1.0).with_beta(vec![2.0, 1.0]);
        let e = energy(&antipodal(), &spec).unwrap();
        assert!((e.total - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(e.pair_count, 2);
    }

    #[test]
    fn minibatch_of_everything_is_full_energy() {
        let spec = EnergySpec::riesz(2.0);
        let full = energy(&equilateral(), &spec).unwrap();
        let batch = minibatch_energy(&equilateral(), &spec, &[0, 1, 2]).unwrap();
        assert_eq!(full, batch);
    }

    #[test]
    fn minibatch_errors() {
        let spec = EnergySpec::riesz(2.0);
        assert_eq!(
            minibatch_energy(&equilateral(), &spec, &[0]),
            Err(MheError::BatchTooSmall { size: 1 })
        );
        assert_eq!(
            minibatch_energy(&equilateral(), &spec, &[0, 3]),
            Err(MheError::BatchIndexOutOfRange { index: 3, count: 3 })
        );
        assert_eq!(
            minibatch_energy(&equilateral(), &spec, &[1, 1]),
            Err(MheError::DuplicateBatchIndex { index: 1 })
        );
    }

    #[test]
    fn minibatch_gradient_is_zero_outside_batch() {
        let spec = EnergySpec::riesz(1.0);
        let g = minibatch_gradient(&equilateral(), &spec, &[2, 0]).unwrap();
        assert_eq!(g[1], vec![0.0; 3]);
        assert!(crate::neurons::norm(&g[0]) > 0.0);
    }

    #[test]
    fn output_minibatch_examples() {
        let spec = EnergySpec::riesz(1.0);
        let v = output_minibatch_energy(&antipodal(), &[0], &spec).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        let v = output_minibatch_energy(&equilateral(), &[0, 1, 2], &spec).unwrap();
        assert!((v - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        assert!((v - 0.577350).abs() < 1e-6);
        assert_eq!(
            output_minibatch_energy(&equilateral(), &[7], &spec),
            Err(MheError::LabelOutOfRange {
                label: 7,
                classes: 3
            })
        );
        assert_eq!(
            output_minibatch_energy(&equilateral(), &[], &spec),
            Err(MheError::EmptyBatch)
        );
        let half = EnergySpec::riesz(1.0).with_space(Space::Half);
        assert_eq!(
            output_minibatch_energy(&equilateral(), &[0], &half),
            Err(MheError::HalfSpaceOnOutput)
        );
    }

    #[test]
    fn log_surrogate_needs_positive_power() {
        assert_eq!(
            log_surrogate_energy(&antipodal(), &EnergySpec::riesz(0.0)),
            Err(MheError::InvalidPower(0.0))
        );
    }

    #[test]
    fn distance_product_of_antipodal_pair() {
        assert!((distance_product(&antipodal()) - 4.0).abs() < 1e-15);
    }
}

//! Monotone projected gradient descent for point configurations on the unit
//! sphere.
//!
//! Each iteration takes `x - eta * grad`, renormalizes every row and accepts
//! the trial only if the objective strictly decreases. A rejected trial
//! multiplies `eta` by `step_decay` and retries; an accepted one multiplies it
//! by `step_growth`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::energy::{energy, energy_gradient_flat, min_pair_distance, EnergySpec};
use crate::error::{MheError, Result};
use crate::neurons::{geodesic, norm, project_tangent, NeuronSet, NORM_EPSILON};
use crate::orthonormal::orthonormal_reg;
use crate::serde_ext::ext_real;

/// Trial configurations with two points closer than this are rejected.
pub const MIN_TRIAL_SEPARATION: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    /// Initial step size.
    pub step_size: f64,
    pub max_iters: usize,
    /// Stop once the largest per-neuron gradient norm drops below this.
    pub grad_tol: f64,
    /// Step-size factor on a rejected trial, in `(0, 1]`.
    pub step_decay: f64,
    /// Step-size factor after an accepted trial, `>= 1`.
    pub step_growth: f64,
    /// Consecutive rejections tolerated before giving up.
    pub max_backtracks: usize,
    /// Keep every `snapshot_stride`-th accepted iterate; `0` keeps only the
    /// first and last.
    pub snapshot_stride: usize,
    /// Seeds random initializations in the experiments built on `minimize`.
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            step_size: 0.1,
            max_iters: 20_000,
            grad_tol: 1e-8,
            step_decay: 0.5,
            step_growth: 1.1,
            max_backtracks: 60,
            snapshot_stride: 0,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(MheError::InvalidConfig(msg.to_string()));
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return bad("step_size must be > 0");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be >= 1");
        }
        if !(self.grad_tol.is_finite() && self.grad_tol > 0.0) {
            return bad("grad_tol must be > 0");
        }
        if !(self.step_decay > 0.0 && self.step_decay <= 1.0) {
            return bad("step_decay must lie in (0, 1]");
        }
        if !(self.step_growth.is_finite() && self.step_growth >= 1.0) {
            return bad("step_growth must be >= 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Largest gradient norm fell below `grad_tol`.
    Converged,
    MaxIters,
    /// No decreasing step found within `max_backtracks` halvings.
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    /// Number of accepted steps taken before this iterate.
    pub iteration: usize,
    pub points: NeuronSet,
    #[serde(with = "ext_real")]
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Sampled iterates; the first and last are always present.
    pub iterates: Vec<Snapshot>,
    /// Objective value at every accepted iterate, starting with the initial
    /// one.
    pub energies: Vec<f64>,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub final_grad_norm: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub final_step_size: f64,
    /// Total geodesic distance travelled by each point (radians).
    pub path_lengths: Vec<f64>,
}

impl Trajectory {
    pub fn final_points(&self) -> &NeuronSet {
        &self.iterates.last().expect("trajectory has iterates").points
    }

    pub fn final_energy(&self) -> f64 {
        *self.energies.last().expect("trajectory has energies")
    }
}

/// Objective defined on configurations of unit vectors.
pub trait SphereObjective {
    fn value(&self, points: &NeuronSet) -> Result<f64>;

    /// Gradient at unit `points`, flat row-major and tangent to the sphere.
    fn gradient(&self, points: &NeuronSet) -> Result<Vec<f64>>;

    /// Whether a trial configuration may be accepted at all.
    fn admissible(&self, _points: &NeuronSet) -> bool {
        true
    }
}

/// Hyperspherical energy as an optimization objective.
pub struct EnergyObjective<'a>(pub &'a EnergySpec);

impl SphereObjective for EnergyObjective<'_> {
    fn value(&self, points: &NeuronSet) -> Result<f64> {
        Ok(energy(points, self.0)?.total)
    }

    fn gradient(&self, points: &NeuronSet) -> Result<Vec<f64>> {
        energy_gradient_flat(points, self.0)
    }

    fn admissible(&self, points: &NeuronSet) -> bool {
        min_pair_distance(points, self.0).is_ok_and(|d| d >= MIN_TRIAL_SEPARATION)
    }
}

/// `|U^T U - I|_F^2` over the unit vectors `U`.
pub struct OrthonormalObjective;

impl SphereObjective for OrthonormalObjective {
    fn value(&self, points: &NeuronSet) -> Result<f64> {
        Ok(orthonormal_reg(&points.normalized().to_rows())?.0)
    }

    fn gradient(&self, points: &NeuronSet) -> Result<Vec<f64>> {
        let unit = points.normalized();
        let (_, grad) = orthonormal_reg(&unit.to_rows())?;
        let mut flat: Vec<f64> = grad.into_iter().flatten().collect();
        let dim = unit.dim();
        for (i, r) in points.norms().into_iter().enumerate() {
            project_tangent(&mut flat[i * dim..(i + 1) * dim], unit.row(i), r);
        }
        Ok(flat)
    }
}

/// `n` points uniform on the unit sphere in `R^dim_ambient` (normalized
/// standard Gaussians), deterministic in `seed`.
pub fn random_sphere_init(n: usize, dim_ambient: usize, seed: u64) -> Result<NeuronSet> {
    if n < 1 || dim_ambient < 2 {
        return Err(MheError::InvalidConfig(format!(
            "need n >= 1 and dim_ambient >= 2, got n = {n}, dim_ambient = {dim_ambient}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(n * dim_ambient);
    let mut row = vec![0.0; dim_ambient];
    for _ in 0..n {
        loop {
            row.iter_mut()
                .for_each(|v| *v = StandardNormal.sample(&mut rng));
            let r = norm(&row);
            if r > NORM_EPSILON {
                data.extend(row.iter().map(|v| v / r));
                break;
            }
        }
    }
    NeuronSet::from_flat(data, dim_ambient)
}

fn max_row_norm(flat: &[f64], dim: usize) -> f64 {
    flat.chunks_exact(dim).map(norm).fold(0.0, f64::max)
}

fn trial_step(x: &NeuronSet, grad: &[f64], eta: f64) -> Option<NeuronSet> {
    let mut data: Vec<f64> = x
        .as_flat()
        .iter()
        .zip(grad)
        .map(|(xk, gk)| xk - eta * gk)
        .collect();
    for row in data.chunks_exact_mut(x.dim()) {
        let r = norm(row);
        row.iter_mut().for_each(|v| *v /= r);
    }
    NeuronSet::from_flat(data, x.dim()).ok()
}

/// Minimizes `objective` starting from `init` (rows are normalized first).
pub fn minimize_objective<O: SphereObjective + ?Sized>(
    objective: &O,
    init: &NeuronSet,
    opt: &OptimizerConfig,
) -> Result<Trajectory> {
    opt.validate()?;
    let mut x = init.normalized();
    let dim = x.dim();
    let mut value = objective.value(&x)?;
    if !value.is_finite() {
        return Err(MheError::NonFiniteEnergy);
    }
    let mut grad = objective.gradient(&x)?;
    let mut grad_norm = max_row_norm(&grad, dim);
    let mut eta = opt.step_size;

    let mut iterates = vec![Snapshot {
        iteration: 0,
        points: x.clone(),
        energy: value,
    }];
    let mut energies = vec![value];
    let mut path_lengths = vec![0.0; x.count()];
    let mut accepted = 0;
    let mut rejected = 0;

    let stop_reason = 'outer: loop {
        if grad_norm < opt.grad_tol {
            break StopReason::Converged;
        }
        if accepted >= opt.max_iters {
            break StopReason::MaxIters;
        }
        let mut backtracks = 0;
        let (next, next_value) = loop {
            if let Some(trial) = trial_step(&x, &grad, eta) {
                if objective.admissible(&trial) {
                    let trial_value = objective.value(&trial)?;
                    if trial_value < value {
                        break (trial, trial_value);
                    }
                }
            }
            rejected += 1;
            backtracks += 1;
            eta *= opt.step_decay;
            if backtracks > opt.max_backtracks {
                break 'outer StopReason::Stalled;
            }
        };

        for (i, length) in path_lengths.iter_mut().enumerate() {
            *length += geodesic(x.row(i), next.row(i));
        }
        x = next;
        value = next_value;
        accepted += 1;
        eta *= opt.step_growth;
        grad = objective.gradient(&x)?;
        grad_norm = max_row_norm(&grad, dim);
        energies.push(value);
        if opt.snapshot_stride > 0 && accepted % opt.snapshot_stride == 0 {
            iterates.push(Snapshot {
                iteration: accepted,
                points: x.clone(),
                energy: value,
            });
        }
    };

    if iterates.last().map(|s| s.iteration) != Some(accepted) {
        iterates.push(Snapshot {
            iteration: accepted,
            points: x,
            energy: value,
        });
    }
    Ok(Trajectory {
        iterates,
        energies,
        converged: stop_reason == StopReason::Converged,
        stop_reason,
        final_grad_norm: grad_norm,
        accepted_steps: accepted,
        rejected_steps: rejected,
        final_step_size: eta,
        path_lengths,
    })
}

/// Minimizes the hyperspherical energy `spec` from `init`.
pub fn minimize(init: &NeuronSet, spec: &EnergySpec, opt: &OptimizerConfig) -> Result<Trajectory> {
    minimize_objective(&EnergyObjective(spec), init, opt)
}

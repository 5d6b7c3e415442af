//! Configuration-level experiments: MHE vs orthonormal regularization, and
//! how per-neuron weights pin neurons in place.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::optimizer::{
    minimize, minimize_objective, random_sphere_init, OptimizerConfig, OrthonormalObjective,
};
use crate::energy::{EnergySpec, Space};
use crate::error::{MheError, Result};
use crate::neurons::NeuronSet;

/// Final geometry of one seed under the three regularizers, all started from
/// the same random configuration. Angles are in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRun {
    pub seed: u64,
    pub mhe_min_angle: f64,
    pub half_mhe_min_angle: f64,
    pub orthonormal_min_angle: f64,
    /// Minimum angle within `{w, -w}` for the half-space run.
    pub half_mhe_expanded_min_angle: f64,
    /// Minimum angle within `{w, -w}` for the orthonormal run.
    pub orthonormal_expanded_min_angle: f64,
    pub mhe_points: NeuronSet,
    pub half_mhe_points: NeuronSet,
    pub orthonormal_points: NeuronSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub n: usize,
    pub dim_ambient: usize,
    pub spec: EnergySpec,
    pub runs: Vec<ComparisonRun>,
    pub median_mhe_min_angle: f64,
    pub median_half_mhe_min_angle: f64,
    pub median_orthonormal_min_angle: f64,
    pub warnings: Vec<String>,
}

pub(crate) fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn compare_one(n: usize, dim: usize, seed: u64, spec: &EnergySpec, opt: &OptimizerConfig) -> Result<ComparisonRun> {
    let init = random_sphere_init(n, dim, seed)?;
    let full_spec = spec.clone().with_space(Space::Full);
    let half_spec = spec.clone().with_space(Space::Half);
    let mhe = minimize(&init, &full_spec, opt)?;
    let half = minimize(&init, &half_spec, opt)?;
    let ortho = minimize_objective(&OrthonormalObjective, &init, opt)?;
    let (mhe, half, ortho) = (
        mhe.final_points().clone(),
        half.final_points().clone(),
        ortho.final_points().clone(),
    );
    Ok(ComparisonRun {
        seed,
        mhe_min_angle: mhe.min_pairwise_angle(),
        half_mhe_min_angle: half.min_pairwise_angle(),
        orthonormal_min_angle: ortho.min_pairwise_angle(),
        half_mhe_expanded_min_angle: half.half_space_expand().min_pairwise_angle(),
        orthonormal_expanded_min_angle: ortho.half_space_expand().min_pairwise_angle(),
        mhe_points: mhe,
        half_mhe_points: half,
        orthonormal_points: ortho,
    })
}

/// Runs full-space MHE, half-space MHE and orthonormal-regularization descent
/// from identical random starts, one start per seed. `spec` supplies the
/// power and distance; its `space` is overridden per run.
pub fn compare_regularizers(
    n: usize,
    dim_ambient: usize,
    seeds: &[u64],
    spec: &EnergySpec,
    opt: &OptimizerConfig,
) -> Result<ComparisonReport> {
    if seeds.is_empty() {
        return Err(MheError::InvalidConfig("no seeds given".into()));
    }
    if spec.beta.is_some() {
        return Err(MheError::InvalidConfig(
            "the regularizer comparison does not take per-neuron weights".into(),
        ));
    }
    let mut warnings = Vec::new();
    if n <= dim_ambient {
        warnings.push(format!(
            "n = {n} does not exceed dim_ambient = {dim_ambient}; orthonormal regularization can reach an exactly orthogonal configuration here"
        ));
    }
    let runs = seeds
        .par_iter()
        .map(|&seed| compare_one(n, dim_ambient, seed, spec, opt))
        .collect::<Result<Vec<_>>>()?;
    let med = |f: fn(&ComparisonRun) -> f64| median(&runs.iter().map(f).collect::<Vec<_>>());
    Ok(ComparisonReport {
        n,
        dim_ambient,
        spec: spec.clone(),
        median_mhe_min_angle: med(|r| r.mhe_min_angle),
        median_half_mhe_min_angle: med(|r| r.half_mhe_min_angle),
        median_orthonormal_min_angle: med(|r| r.orthonormal_min_angle),
        runs,
        warnings,
    })
}

/// Runs weighted (euclidean) MHE with power `s` from the random start given
/// by `seed` and returns the total angular path length of each neuron.
pub fn weighted_displacement_experiment(
    n: usize,
    dim_ambient: usize,
    beta: &[f64],
    s: f64,
    seed: u64,
    opt: &OptimizerConfig,
) -> Result<Vec<f64>> {
    if beta.len() != n {
        return Err(MheError::BetaLengthMismatch {
            expected: n,
            found: beta.len(),
        });
    }
    let init = random_sphere_init(n, dim_ambient, seed)?;
    let spec = EnergySpec::riesz(s).with_beta(beta.to_vec());
    Ok(minimize(&init, &spec, opt)?.path_lengths)
}

//! Empirical checks of the asymptotic theory of minimal energies: growth of
//! `eps_{s,d}(N)` and uniformity of optimized configurations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use super::optimizer::{minimize, random_sphere_init, OptimizerConfig};
use crate::energy::EnergySpec;
use crate::error::{MheError, Result};
use crate::neurons::{dot, norm, NeuronSet, NORM_EPSILON};

/// Normalized surface measure of the cap `{x in S^d : <x, c> >= height}`.
pub fn cap_measure(d: usize, height: f64) -> f64 {
    let t = height.clamp(-1.0, 1.0);
    let tail = 0.5 * beta_reg(0.5 * d as f64, 0.5, 1.0 - t * t);
    if t >= 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cap {
    pub center: Vec<f64>,
    pub height: f64,
}

/// `count` caps with centers uniform on `S^(dim_ambient - 1)` and heights
/// uniform in `[-1, 1]`.
pub fn random_caps(dim_ambient: usize, count: usize, seed: u64) -> Vec<Cap> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let heights = Uniform::new_inclusive(-1.0, 1.0).expect("valid range");
    (0..count)
        .map(|_| {
            let center = loop {
                let v: Vec<f64> = (0..dim_ambient)
                    .map(|_| StandardNormal.sample(&mut rng))
                    .collect();
                let r = norm(&v);
                if r > NORM_EPSILON {
                    break v.into_iter().map(|x| x / r).collect();
                }
            };
            Cap {
                center,
                height: heights.sample(&mut rng),
            }
        })
        .collect()
}

/// Largest deviation between the fraction of points inside a cap and the
/// cap's exact measure, over `caps`.
pub fn cap_discrepancy(points: &NeuronSet, caps: &[Cap]) -> f64 {
    let unit = points.normalized();
    let n = unit.count() as f64;
    let d = unit.dim() - 1;
    caps.iter()
        .map(|cap| {
            let inside = unit
                .rows()
                .filter(|p| dot(p, &cap.center) >= cap.height)
                .count() as f64;
            (inside / n - cap_measure(d, cap.height)).abs()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimumEnergy {
    /// Lowest final energy over all restarts: an upper bound on the minimal
    /// energy.
    pub energy: f64,
    pub best_restart: usize,
    pub points: NeuronSet,
    pub restart_energies: Vec<f64>,
}

/// Best final energy of `restarts` runs of [`minimize`] on `S^d` (ambient
/// dimension `d + 1`). Restart `r` starts from `random_sphere_init` with seed
/// `opt.seed + r`.
pub fn empirical_minimum_energy(
    n: usize,
    d: usize,
    spec: &EnergySpec,
    restarts: usize,
    opt: &OptimizerConfig,
) -> Result<MinimumEnergy> {
    if restarts == 0 {
        return Err(MheError::InvalidConfig("restarts must be >= 1".into()));
    }
    if d == 0 {
        return Err(MheError::InvalidConfig("sphere dimension d must be >= 1".into()));
    }
    let finals = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let init = random_sphere_init(n, d + 1, opt.seed.wrapping_add(r as u64))?;
            let traj = minimize(&init, spec, opt)?;
            Ok((traj.final_energy(), traj.final_points().clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    let best_restart = finals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
        .map(|(i, _)| i)
        .expect("restarts >= 1");
    Ok(MinimumEnergy {
        energy: finals[best_restart].0,
        best_restart,
        points: finals[best_restart].1.clone(),
        restart_energies: finals.iter().map(|f| f.0).collect(),
    })
}

/// Growth rate `p(N)` of the minimal energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthRegime {
    /// `0 < s < d`: `p(N) = N^2`.
    Quadratic,
    /// `s = d`: `p(N) = N^2 log N`.
    QuadraticLog,
    /// `s > d`: `p(N) = N^(1 + s/d)`.
    Superquadratic,
}

impl GrowthRegime {
    pub fn classify(s: f64, d: usize) -> Result<Self> {
        let df = d as f64;
        if !(s.is_finite() && s > 0.0) || d == 0 {
            return Err(MheError::InvalidRegime { s, d });
        }
        Ok(if s < df {
            GrowthRegime::Quadratic
        } else if s == df {
            GrowthRegime::QuadraticLog
        } else {
            GrowthRegime::Superquadratic
        })
    }

    pub fn scale(self, s: f64, d: usize, n: usize) -> f64 {
        let nf = n as f64;
        match self {
            GrowthRegime::Quadratic => nf * nf,
            GrowthRegime::QuadraticLog => nf * nf * nf.ln(),
            GrowthRegime::Superquadratic => nf.powf(1.0 + s / d as f64),
        }
    }

    /// Leading correction to `eps / p(N)`, used to extrapolate the limit.
    fn correction(self, s: f64, d: usize, n: usize) -> f64 {
        let nf = n as f64;
        match self {
            GrowthRegime::QuadraticLog => 1.0 / nf.ln(),
            _ => nf.powf(-(1.0 - s / d as f64).abs()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub s: f64,
    pub d: usize,
    pub regime: GrowthRegime,
    pub sample_counts: Vec<usize>,
    /// Best energies found, not normalized.
    pub raw_energies: Vec<f64>,
    /// `raw_energies[k] / p(sample_counts[k])`.
    pub min_energies: Vec<f64>,
    /// Intercept of a least-squares fit `ratio = limit + b * correction(N)`.
    pub fitted_limit: f64,
    /// Cap discrepancy of the optimized configuration at the largest `N`.
    pub uniformity_stat: f64,
    /// Cap discrepancy of a random configuration of the same size, same caps.
    pub random_uniformity_stat: f64,
    pub cap_count: usize,
    pub cap_seed: u64,
    /// Best configuration found at the largest `N`.
    pub largest_points: NeuronSet,
}

/// Offsets the cap and reference-configuration seeds away from restart seeds.
const CAP_SEED_OFFSET: u64 = 0x5eed_ca95;
const REFERENCE_SEED_OFFSET: u64 = 0x5eed_4a4d;

pub const DEFAULT_CAP_COUNT: usize = 1000;

fn fit_limit(ratios: &[f64], corrections: &[f64]) -> f64 {
    let n = ratios.len() as f64;
    if ratios.len() < 2 {
        return ratios.first().copied().unwrap_or(f64::NAN);
    }
    let mx = corrections.iter().sum::<f64>() / n;
    let my = ratios.iter().sum::<f64>() / n;
    let sxx: f64 = corrections.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = corrections
        .iter()
        .zip(ratios)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum();
    if sxx == 0.0 {
        return my;
    }
    my - (sxy / sxx) * mx
}

/// Minimal-energy growth and uniformity check for power `s` on `S^d`.
pub fn asymptotic_check(
    s: f64,
    d: usize,
    sample_counts: &[usize],
    restarts: usize,
    opt: &OptimizerConfig,
) -> Result<AsymptoticReport> {
    let regime = GrowthRegime::classify(s, d)?;
    if sample_counts.is_empty() || sample_counts[0] < 2 {
        return Err(MheError::InvalidConfig(
            "sample_counts must be non-empty with every N >= 2".into(),
        ));
    }
    if sample_counts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(MheError::InvalidConfig(
            "sample_counts must be strictly increasing".into(),
        ));
    }
    let spec = EnergySpec::riesz(s);
    let minima = sample_counts
        .iter()
        .map(|&n| empirical_minimum_energy(n, d, &spec, restarts, opt))
        .collect::<Result<Vec<_>>>()?;
    let raw_energies: Vec<f64> = minima.iter().map(|m| m.energy).collect();
    let min_energies: Vec<f64> = sample_counts
        .iter()
        .zip(&raw_energies)
        .map(|(&n, e)| e / regime.scale(s, d, n))
        .collect();
    let corrections: Vec<f64> = sample_counts
        .iter()
        .map(|&n| regime.correction(s, d, n))
        .collect();

    let largest = minima.last().expect("non-empty");
    let n_max = *sample_counts.last().expect("non-empty");
    let cap_seed = opt.seed.wrapping_add(CAP_SEED_OFFSET);
    let caps = random_caps(d + 1, DEFAULT_CAP_COUNT, cap_seed);
    let reference = random_sphere_init(n_max, d + 1, opt.seed.wrapping_add(REFERENCE_SEED_OFFSET))?;

    Ok(AsymptoticReport {
        s,
        d,
        regime,
        sample_counts: sample_counts.to_vec(),
        fitted_limit: fit_limit(&min_energies, &corrections),
        raw_energies,
        min_energies,
        uniformity_stat: cap_discrepancy(&largest.points, &caps),
        random_uniformity_stat: cap_discrepancy(&reference, &caps),
        cap_count: DEFAULT_CAP_COUNT,
        cap_seed,
        largest_points: largest.points.clone(),
    })
}

//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero when any
//! criterion fails.

mod common;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::*;
use mhe::energy::{distance_product, sample_batch};
use mhe::mlp::{train, OutputMode, RegularizerConfig, TrainConfig};
use mhe::neurons::geodesic;
use mhe::sphere::{
    asymptotic_check, cap_discrepancy, compare_regularizers, empirical_minimum_energy, minimize,
    random_caps, random_sphere_init, weighted_displacement_experiment, OptimizerConfig,
};
use mhe::{energy, energy_gradient, minibatch_gradient, Distance, EnergySpec, NeuronSet, Space};
use rayon::prelude::*;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn opt(seed: u64) -> OptimizerConfig {
    OptimizerConfig {
        seed,
        ..Default::default()
    }
}

fn gradient_oracles() -> Outcome {
    let mut worst_energy = 0.0f64;
    let mut cases = 0;
    for dim in [3, 4, 8] {
        for seed in 0..3 {
            let neurons = random_neurons(6, dim, 1000 + 10 * dim as u64 + seed);
            for spec in all_specs(6, seed) {
                let analytic = flat_rows(&energy_gradient(&neurons, &spec).unwrap());
                worst_energy = worst_energy.max(relative_error(&analytic, &energy_fd(&neurons, &spec)));
                cases += 1;
            }
        }
    }
    let mut worst_composite = 0.0f64;
    for space in [Space::Full, Space::Half] {
        for distance in [Distance::Euclidean, Distance::Geodesic] {
            for s in [0.0, 1.0, 2.0] {
                for output_mode in [OutputMode::FullSum, OutputMode::DataDependentMinibatch] {
                    let reg = RegularizerConfig {
                        lambda_w: 0.1,
                        lambda_h: 1.0,
                        lambda_o: 1.0,
                        hidden_spec: EnergySpec::riesz(s).with_distance(distance).with_space(space),
                        output_spec: EnergySpec::riesz(s).with_distance(distance),
                        output_mode,
                        ..Default::default()
                    };
                    worst_composite = worst_composite.max(composite_error(&reg, 3));
                }
            }
        }
    }
    check(
        worst_energy < 1e-5 && worst_composite < 1e-4,
        format!(
            "{cases} energy cases, worst rel err {worst_energy:.2e} (< 1e-5); composite worst {worst_composite:.2e} (< 1e-4)"
        ),
    )
}

fn analytic_minima() -> Outcome {
    let start = Instant::now();
    let cases = [
        (2, 1.0, 1.0),
        (3, 1.0, 2.0 * 3f64.sqrt()),
        (4, 1.0, 12.0 * (3.0f64 / 8.0).sqrt()),
        (2, 0.0, -2.0 * 2f64.ln()),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, s, expected) in cases {
        let found = empirical_minimum_energy(n, 2, &EnergySpec::riesz(s), 5, &opt(0)).unwrap();
        let rel = ((found.energy - expected) / expected).abs();
        ok &= rel < 1e-3;
        parts.push(format!("N={n} s={s}: {:.6} (rel {rel:.1e})", found.energy));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 60.0;
    check(ok, format!("{}; 5 restarts; {secs:.2}s", parts.join(", ")))
}

fn final_angle(space: Space, seed: u64) -> f64 {
    let init = random_sphere_init(2, 2, seed).unwrap();
    let traj = minimize(&init, &EnergySpec::riesz(1.0).with_space(space), &opt(seed)).unwrap();
    let p = traj.final_points();
    geodesic(p.row(0), p.row(1)).to_degrees()
}

fn half_space_geometry() -> Outcome {
    let half: Vec<f64> = (0..20).map(|s| final_angle(Space::Half, s)).collect();
    let full: Vec<f64> = (0..20).map(|s| final_angle(Space::Full, s)).collect();
    let half_dev = half.iter().map(|a| (a - 90.0).abs()).fold(0.0, f64::max);
    let full_dev = full.iter().map(|a| (a - 180.0).abs()).fold(0.0, f64::max);
    let spec = EnergySpec::riesz(1.0).with_space(Space::Half);
    let steps = 18_000;
    let grid_best = (1..steps)
        .map(|k| {
            let phi = PI * k as f64 / steps as f64;
            let set = NeuronSet::new(vec![vec![1.0, 0.0], vec![phi.cos(), phi.sin()]]).unwrap();
            (energy(&set, &spec).unwrap().total, phi.to_degrees())
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap()
        .1;
    check(
        half_dev <= 0.5 && full_dev <= 0.5 && (grid_best - 90.0).abs() <= 0.01,
        format!(
            "half-space max |angle - 90| = {half_dev:.2e} deg, full-space max |angle - 180| = {full_dev:.2e} deg over 20 seeds; grid optimum {grid_best:.3} deg"
        ),
    )
}

fn riesz_one_integral() -> f64 {
    let samples = 1_000_000;
    let u = random_sphere_init(samples, 3, 101).unwrap();
    let v = random_sphere_init(samples, 3, 202).unwrap();
    (0..samples)
        .map(|k| {
            let d: f64 = u.row(k).iter().zip(v.row(k)).map(|(a, b)| (a - b) * (a - b)).sum();
            1.0 / d.sqrt()
        })
        .sum::<f64>()
        / samples as f64
}

fn growth_and_uniformity() -> (Outcome, Outcome) {
    let report = asymptotic_check(1.0, 2, &[20, 50, 100], 3, &opt(0)).unwrap();
    let ratios = &report.min_energies;
    let integral = riesz_one_integral();
    let growth = check(
        ratios.windows(2).all(|w| w[1] >= w[0])
            && (0.85..=1.0).contains(&ratios[2])
            && (integral - 1.0).abs() <= 0.005,
        format!(
            "E/N^2 = [{:.4}, {:.4}, {:.4}], Monte Carlo I_1 = {integral:.4}",
            ratios[0], ratios[1], ratios[2]
        ),
    );

    let points = &report.largest_points;
    let wins = (0..20u64)
        .filter(|&k| {
            let caps = random_caps(3, 1000, 7000 + k);
            let reference = random_sphere_init(100, 3, 9000 + k).unwrap();
            cap_discrepancy(points, &caps) < cap_discrepancy(&reference, &caps)
        })
        .count();
    let uniformity = check(
        wins >= 18,
        format!(
            "optimized N=100 has smaller cap discrepancy in {wins}/20 cap seeds (stat {:.4} vs random {:.4} on the report's caps)",
            report.uniformity_stat, report.random_uniformity_stat
        ),
    );
    (growth, uniformity)
}

fn minibatch_unbiasedness() -> Outcome {
    let neurons = random_neurons(6, 4, 606);
    let spec = EnergySpec::default();
    let draws = 20_000;
    let mut rng = rng(607);
    let mut mean = vec![0.0; 24];
    for _ in 0..draws {
        let batch = sample_batch(&mut rng, 6, 3).unwrap();
        let g = minibatch_gradient(&neurons, &spec, &batch).unwrap();
        for (m, x) in mean.iter_mut().zip(g.iter().flatten()) {
            *m += x / draws as f64;
        }
    }
    let full = flat_rows(&energy_gradient(&neurons, &spec).unwrap());
    let cos = cosine(&mean, &full);
    let scaled: Vec<f64> = full.iter().map(|g| 0.2 * g).collect();
    check(
        cos > 0.999,
        format!(
            "cosine {cos:.6} at {draws} draws; rel err vs 0.2 x full gradient {:.4}",
            relative_error(&mean, &scaled)
        ),
    )
}

fn regularizer_comparison() -> Outcome {
    let seeds: Vec<u64> = (0..20).collect();
    let report = compare_regularizers(10, 3, &seeds, &EnergySpec::riesz(2.0), &opt(0)).unwrap();
    check(
        report.median_mhe_min_angle > report.median_orthonormal_min_angle,
        format!(
            "median min angle: MHE {:.2} deg, half-space {:.2} deg, orthonormal {:.2} deg",
            report.median_mhe_min_angle.to_degrees(),
            report.median_half_mhe_min_angle.to_degrees(),
            report.median_orthonormal_min_angle.to_degrees()
        ),
    )
}

fn class_imbalance() -> Outcome {
    let results: Vec<(f64, f64, f64, f64)> = (0..10u64)
        .into_par_iter()
        .map(|seed| {
            let setup = imbalance_setup(seed);
            let cfg = TrainConfig {
                epochs: 40,
                batch_size: 64,
                lr: 0.05,
                seed,
                dump_features: false,
                max_grad_norm: Some(5.0),
            };
            let reg = RegularizerConfig {
                lambda_h: 1.0,
                lambda_o: 1.0,
                ..Default::default()
            };
            let mut base = imbalance_model(8, 64, seed);
            let mut regd = base.clone();
            let b = train(&mut base, &setup.train, Some(&setup.test), &RegularizerConfig::default(), &cfg).unwrap();
            let r = train(&mut regd, &setup.train, Some(&setup.test), &reg, &cfg).unwrap();
            (b.per_class_recall[0], r.per_class_recall[0], b.min_classifier_angle, r.min_classifier_angle)
        })
        .collect();
    let recall_base = results.iter().map(|r| r.0).sum::<f64>() / 10.0;
    let recall_mhe = results.iter().map(|r| r.1).sum::<f64>() / 10.0;
    let wins = results.iter().filter(|r| r.3 > r.2).count();
    check(
        recall_mhe > recall_base && wins >= 8,
        format!(
            "mean rare-class recall: baseline {recall_base:.3}, MHE {recall_mhe:.3}; larger min classifier angle in {wins}/10 seeds"
        ),
    )
}

fn weighted_mhe() -> Outcome {
    let mut beta = vec![1.0; 10];
    beta[0] = 10.0;
    let pinned = (0..10u64)
        .filter(|&seed| {
            let d = weighted_displacement_experiment(10, 3, &beta, 2.0, seed, &opt(seed)).unwrap();
            d[1..].iter().all(|&x| d[0] < x)
        })
        .count();
    let identical = (0..10u64)
        .filter(|&seed| {
            let init = random_sphere_init(10, 3, seed).unwrap();
            let plain = minimize(&init, &EnergySpec::riesz(2.0), &opt(seed)).unwrap();
            let equal = minimize(&init, &EnergySpec::riesz(2.0).with_beta(vec![1.0; 10]), &opt(seed)).unwrap();
            plain == equal
        })
        .count();
    check(
        pinned == 10 && identical == 10,
        format!("beta=10 neuron moves least in {pinned}/10 seeds; equal-beta runs bit-identical in {identical}/10"),
    )
}

fn invariance_suite() -> Outcome {
    let mut worst = [0.0f64; 5];
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
    for seed in 0..5u64 {
        let neurons = random_neurons(6, 4, 500 + seed);
        let perm = [5, 3, 0, 4, 1, 2];
        let rotation = random_rotation(4, 600 + seed);
        let scaled = NeuronSet::new(
            neurons.rows().enumerate().map(|(i, w)| w.iter().map(|x| x * (0.01 + 7.0 * i as f64)).collect()).collect(),
        )
        .unwrap();
        for spec in all_specs(6, seed) {
            let base = energy(&neurons, &spec).unwrap().total;
            let mut pspec = spec.clone();
            if let Some(b) = &spec.beta {
                pspec.beta = Some(perm.iter().map(|&i| b[i]).collect());
            }
            worst[0] = worst[0].max(rel(energy(&neurons.select(&perm).unwrap(), &pspec).unwrap().total, base));
            worst[1] = worst[1].max(rel(energy(&rotate(&neurons, &rotation), &spec).unwrap().total, base));
            if spec.beta.is_none() {
                worst[2] = worst[2].max(rel(energy(&scaled, &spec).unwrap().total, base));
            }
        }
        let e0 = energy(&neurons, &EnergySpec::riesz(0.0)).unwrap().total;
        worst[3] = worst[3].max(rel((-e0).exp(), distance_product(&neurons)));
        let unit = neurons.normalized();
        for i in 0..6 {
            for j in (0..6).filter(|&j| j != i) {
                let (a, b) = (unit.row(i), unit.row(j));
                let chord: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
                worst[4] = worst[4].max((chord - 2.0 * (geodesic(a, b) / 2.0).sin()).abs());
            }
        }
    }

    let setup = mhe::mlp::make_imbalanced_blobs(4, &[10, 60, 60, 60], 5, 0.2, 1).unwrap();
    let run = || {
        let mut model = mhe::mlp::MlpArch::new(vec![5, 12, 2, 4]).he_init(1).unwrap();
        let reg = RegularizerConfig {
            lambda_w: 0.01,
            ..RegularizerConfig::mhe(Space::Half)
        };
        let cfg = TrainConfig {
            epochs: 5,
            batch_size: 32,
            seed: 1,
            ..Default::default()
        };
        (train(&mut model, &setup, None, &reg, &cfg).unwrap(), reg)
    };
    let (report, reg) = run();
    let decomposition = report
        .epochs
        .iter()
        .map(|e| {
            let l = e.loss;
            (l.total - (l.data + reg.lambda_h * l.hidden_mhe + reg.lambda_o * l.output_mhe + reg.lambda_w * l.weight_decay)).abs()
        })
        .fold(0.0, f64::max);
    let deterministic = run().0 == report;

    check(
        worst[0] < 1e-12
            && worst[1] < 1e-9
            && worst[2] < 1e-10
            && worst[3] < 1e-9
            && worst[4] < 1e-12
            && decomposition < 1e-9
            && deterministic,
        format!(
            "permutation {:.1e}, rotation {:.1e}, scaling {:.1e}, product form {:.1e}, chord {:.1e}, loss decomposition {decomposition:.1e}, deterministic {deterministic}",
            worst[0], worst[1], worst[2], worst[3], worst[4]
        ),
    )
}

fn run(label: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    let secs = start.elapsed().as_secs_f64();
    match &outcome {
        Ok(detail) => println!("PASS  {label}: {detail} [{secs:.1}s]"),
        Err(detail) => println!("FAIL  {label}: {detail} [{secs:.1}s]"),
    }
    outcome.is_ok()
}

fn main() {
    let mut all = true;
    all &= run("1 gradient oracles", gradient_oracles);
    all &= run("2 analytic minima", analytic_minima);
    all &= run("3 half-space geometry", half_space_geometry);
    let (growth, uniformity) = growth_and_uniformity();
    all &= run("4 energy growth (s=1, d=2)", || growth);
    all &= run("5 cap-discrepancy uniformity", || uniformity);
    all &= run("6 mini-batch unbiasedness", minibatch_unbiasedness);
    all &= run("7 MHE vs orthonormal on S^2", regularizer_comparison);
    all &= run("8 class-imbalance direction of effect", class_imbalance);
    all &= run("9 weighted MHE", weighted_mhe);
    all &= run("10 invariance suite", invariance_suite);
    if !all {
        std::process::exit(1);
    }
}

#![allow(dead_code)]

use mhe::mlp::{
    blob_means, composite_loss, flatten_gradient, sample_blobs, Activation, MlpArch, MlpModel,
    RegularizerConfig, SyntheticDataset,
};
use mhe::{energy, Distance, EnergySpec, NeuronSet, Space};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Gaussian directions with norms spread over [0.5, 2.5].
pub fn random_neurons(n: usize, dim: usize, seed: u64) -> NeuronSet {
    let mut rng = rng(seed);
    let rows = (0..n)
        .map(|_| {
            let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let scale = rng.random_range(0.5..2.5) / r;
            v.into_iter().map(|x| x * scale).collect()
        })
        .collect();
    NeuronSet::new(rows).unwrap()
}

pub fn random_beta(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng(seed);
    (0..n).map(|_| rng.random_range(0.5..3.0)).collect()
}

/// Orthogonal matrix from Gram-Schmidt on a Gaussian matrix (rows).
pub fn random_rotation(dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng(seed);
    let mut q: Vec<Vec<f64>> = Vec::new();
    while q.len() < dim {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        for u in &q {
            let p: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= p * b);
        }
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > 1e-6 {
            q.push(v.into_iter().map(|x| x / r).collect());
        }
    }
    q
}

pub fn rotate(neurons: &NeuronSet, q: &[Vec<f64>]) -> NeuronSet {
    let rows = neurons
        .rows()
        .map(|w| q.iter().map(|qr| qr.iter().zip(w).map(|(a, b)| a * b).sum()).collect())
        .collect();
    NeuronSet::new(rows).unwrap()
}

pub fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|k| {
            probe[k] = x[k] + h;
            let up = f(&probe);
            probe[k] = x[k] - h;
            let down = f(&probe);
            probe[k] = x[k];
            (up - down) / (2.0 * h)
        })
        .collect()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `|a - b| / |b|` in the euclidean norm.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm(&diff) / norm(b).max(1e-300)
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (norm(a) * norm(b))
}

/// Every energy variant: s in {0, 1, 2} x distance x space, plus weighted
/// euclidean variants.
pub fn all_specs(n: usize, seed: u64) -> Vec<EnergySpec> {
    let mut specs = Vec::new();
    for s in [0.0, 1.0, 2.0] {
        for distance in [Distance::Euclidean, Distance::Geodesic] {
            for space in [Space::Full, Space::Half] {
                specs.push(EnergySpec::riesz(s).with_distance(distance).with_space(space));
                if distance == Distance::Euclidean {
                    specs.push(
                        EnergySpec::riesz(s)
                            .with_space(space)
                            .with_beta(random_beta(n, seed ^ s.to_bits())),
                    );
                }
            }
        }
    }
    specs
}

pub fn flat_rows(rows: &[Vec<f64>]) -> Vec<f64> {
    rows.iter().flatten().copied().collect()
}

/// Setting of the class-imbalance experiment: 10 classes, class 0 has 20
/// training samples and the others 1000.
pub struct ImbalanceSetup {
    pub train: SyntheticDataset,
    pub test: SyntheticDataset,
}

pub const IMBALANCE_DIM: usize = 16;
pub const IMBALANCE_SPREAD: f64 = 0.1;

pub fn imbalance_setup(seed: u64) -> ImbalanceSetup {
    let mut counts = vec![1000; 10];
    counts[0] = 20;
    let train =
        mhe::mlp::make_imbalanced_blobs(10, &counts, IMBALANCE_DIM, IMBALANCE_SPREAD, seed).unwrap();
    let means = blob_means(10, IMBALANCE_DIM, seed).unwrap();
    let test = sample_blobs(&means, &[200; 10], IMBALANCE_SPREAD, seed + 1000).unwrap();
    ImbalanceSetup { train, test }
}

pub fn imbalance_model(feature_dim: usize, width: usize, seed: u64) -> MlpModel {
    MlpArch::new(vec![IMBALANCE_DIM, width, feature_dim, 10])
        .with_feature_activation(Activation::Identity)
        .he_init(seed)
        .unwrap()
}

pub const H: f64 = 1e-5;

pub fn energy_fd(neurons: &NeuronSet, spec: &EnergySpec) -> Vec<f64> {
    let dim = neurons.dim();
    central_difference(
        |x| {
            let set = NeuronSet::from_flat(x.to_vec(), dim).unwrap();
            energy(&set, spec).unwrap().total
        },
        neurons.as_flat(),
        H,
    )
}

pub fn composite_fixture(seed: u64) -> (MlpModel, SyntheticDataset) {
    let model = MlpArch::new(vec![5, 8, 8, 3])
        .with_feature_activation(Activation::Relu)
        .he_init(seed)
        .unwrap();
    let mut rng = rng(seed + 1);
    let points: Vec<Vec<f64>> = (0..12)
        .map(|_| {
            (0..5)
                .map(|_| rng.sample(StandardNormal))
                .collect()
        })
        .collect();
    let labels = (0..12).map(|i| i % 3).collect();
    (model, SyntheticDataset::new(points, labels, 3).unwrap())
}

pub fn composite_error(reg: &RegularizerConfig, seed: u64) -> f64 {
    let (model, data) = composite_fixture(seed);
    let batch: Vec<usize> = (0..data.len()).collect();
    let (_, grads) = composite_loss(&model, &data, &batch, reg).unwrap();
    let analytic = flatten_gradient(&grads);
    let numeric = central_difference(
        |p| {
            let mut m = model.clone();
            m.set_params(p).unwrap();
            composite_loss(&m, &data, &batch, reg).unwrap().0.total
        },
        &model.params(),
        H,
    );
    relative_error(&analytic, &numeric)
}

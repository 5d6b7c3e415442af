use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::data::SyntheticDataset;
use super::loss::{composite_loss, LayerGradient, LossBreakdown, RegularizerConfig};
use super::model::{argmax, MlpModel};
use crate::error::{MheError, Result};
use crate::neurons::geodesic;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    /// Seeds the per-epoch shuffles.
    pub seed: u64,
    /// Record the penultimate features of the evaluation set (2-D models
    /// only).
    pub dump_features: bool,
    /// Rescale each batch gradient to at most this euclidean norm.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_grad_norm: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 20,
            batch_size: 64,
            lr: 0.05,
            seed: 0,
            dump_features: false,
            max_grad_norm: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(MheError::InvalidConfig("epochs must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(MheError::InvalidConfig("batch_size must be positive".into()));
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(MheError::InvalidConfig(format!(
                "lr must be finite and positive, got {}",
                self.lr
            )));
        }
        if let Some(c) = self.max_grad_norm {
            if !(c.is_finite() && c > 0.0) {
                return Err(MheError::InvalidConfig(format!(
                    "max_grad_norm must be finite and positive, got {c}"
                )));
            }
        }
        Ok(())
    }
}

fn clip_scale(grads: &[LayerGradient], max_norm: Option<f64>) -> f64 {
    let Some(max_norm) = max_norm else {
        return 1.0;
    };
    let sq: f64 = grads
        .iter()
        .flat_map(|g| g.weights.iter().chain(&g.bias))
        .map(|v| v * v)
        .sum();
    let norm = sq.sqrt();
    if norm > max_norm {
        max_norm / norm
    } else {
        1.0
    }
}

/// Loss terms averaged over the batches of one epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    #[serde(flatten)]
    pub loss: LossBreakdown,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub x: f64,
    pub y: f64,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs: Vec<EpochStats>,
    pub accuracy: f64,
    pub per_class_recall: Vec<f64>,
    /// Pairwise angles between classifier neurons, in radians.
    pub classifier_angles: Vec<Vec<f64>>,
    pub min_classifier_angle: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<Vec<FeatureRow>>,
    pub model: MlpModel,
}

/// Overall accuracy and per-class recall of `model` on `data`. A class with
/// no samples gets recall `NaN`.
pub fn evaluate(model: &MlpModel, data: &SyntheticDataset) -> Result<(f64, Vec<f64>)> {
    if data.is_empty() {
        return Err(MheError::EmptyBatch);
    }
    let mut hits = vec![0usize; data.classes()];
    for (x, &y) in data.points().iter().zip(data.labels()) {
        if model.predict(x)? == y {
            hits[y] += 1;
        }
    }
    let accuracy = hits.iter().sum::<usize>() as f64 / data.len() as f64;
    let recall = hits
        .iter()
        .zip(data.class_counts())
        .map(|(&h, &n)| if n == 0 { f64::NAN } else { h as f64 / n as f64 })
        .collect();
    Ok((accuracy, recall))
}

/// `c x c` matrix of angles (radians) between the normalized classifier
/// neurons.
pub fn classifier_neuron_angles(model: &MlpModel) -> Result<Vec<Vec<f64>>> {
    let unit = model.output_layer().neurons()?.normalized();
    let c = unit.count();
    let mut angles = vec![vec![0.0; c]; c];
    for i in 0..c {
        for j in i + 1..c {
            let a = geodesic(unit.row(i), unit.row(j));
            angles[i][j] = a;
            angles[j][i] = a;
        }
    }
    Ok(angles)
}

fn min_off_diagonal(angles: &[Vec<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, row) in angles.iter().enumerate() {
        for (j, &a) in row.iter().enumerate() {
            if i != j {
                best = best.min(a);
            }
        }
    }
    best
}

fn feature_dump(model: &MlpModel, data: &SyntheticDataset) -> Result<Vec<FeatureRow>> {
    if model.feature_dim() != 2 {
        return Err(MheError::InvalidConfig(format!(
            "feature dumps need 2-D features, the model has {}",
            model.feature_dim()
        )));
    }
    data.points()
        .iter()
        .zip(data.labels())
        .map(|(x, &label)| {
            let pass = model.forward(x)?;
            let f = pass.features();
            Ok(FeatureRow {
                x: f[0],
                y: f[1],
                label,
            })
        })
        .collect()
}

/// Mini-batch gradient descent with a fixed learning rate on the composite
/// objective, with optional gradient-norm clipping. Samples are reshuffled
/// every epoch; the last batch may be short. Metrics, angles and the optional feature dump are computed on
/// `eval` (the training set when `None`).
pub fn train(
    model: &mut MlpModel,
    train_set: &SyntheticDataset,
    eval: Option<&SyntheticDataset>,
    reg: &RegularizerConfig,
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    reg.validate()?;
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(MheError::EmptyBatch);
    }
    let eval = eval.unwrap_or(train_set);
    for data in [train_set, eval] {
        if data.dim() != model.input_dim() {
            return Err(MheError::DimensionMismatch {
                expected: model.input_dim(),
                found: data.dim(),
            });
        }
    }
    if cfg.dump_features && model.feature_dim() != 2 {
        return Err(MheError::InvalidConfig(format!(
            "feature dumps need 2-D features, the model has {}",
            model.feature_dim()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut epochs = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut sum = LossBreakdown::default();
        let mut batches = 0usize;
        for batch in order.chunks(cfg.batch_size) {
            let (loss, grads) = composite_loss(model, train_set, batch, reg)?;
            let lr = cfg.lr * clip_scale(&grads, cfg.max_grad_norm);
            for (layer, grad) in model.layers_mut().iter_mut().zip(&grads) {
                for (w, g) in layer.weights.iter_mut().zip(&grad.weights) {
                    *w -= lr * g;
                }
                for (b, g) in layer.bias.iter_mut().zip(&grad.bias) {
                    *b -= lr * g;
                }
            }
            sum.total += loss.total;
            sum.data += loss.data;
            sum.hidden_mhe += loss.hidden_mhe;
            sum.output_mhe += loss.output_mhe;
            sum.weight_decay += loss.weight_decay;
            batches += 1;
        }
        let inv = 1.0 / batches as f64;
        let mean = LossBreakdown {
            total: sum.total * inv,
            data: sum.data * inv,
            hidden_mhe: sum.hidden_mhe * inv,
            output_mhe: sum.output_mhe * inv,
            weight_decay: sum.weight_decay * inv,
        };
        if !mean.total.is_finite() {
            return Err(MheError::NonFiniteEnergy);
        }
        epochs.push(EpochStats { epoch, loss: mean });
    }

    let (accuracy, per_class_recall) = evaluate(model, eval)?;
    let classifier_angles = classifier_neuron_angles(model)?;
    let features = if cfg.dump_features {
        Some(feature_dump(model, eval)?)
    } else {
        None
    };
    Ok(TrainReport {
        epochs,
        accuracy,
        per_class_recall,
        min_classifier_angle: min_off_diagonal(&classifier_angles),
        classifier_angles,
        features,
        model: model.clone(),
    })
}

/// Index of the largest logit for every point.
pub fn predictions(model: &MlpModel, data: &SyntheticDataset) -> Result<Vec<usize>> {
    data.points()
        .iter()
        .map(|x| Ok(argmax(&model.forward(x)?.logits)))
        .collect()
}

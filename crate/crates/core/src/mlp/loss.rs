use serde::{Deserialize, Serialize};

use super::data::SyntheticDataset;
use super::model::{DenseLayer, MlpModel};
use crate::energy::{
    energy, energy_gradient, output_minibatch_gradient, validate_spec, EnergySpec, LayerRole,
    Space,
};
use crate::error::{MheError, Result};
use crate::neurons::{norm, NORM_EPSILON};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputMode {
    /// Energy over all classifier neurons.
    #[default]
    FullSum,
    /// Energy between the classifier neuron of each batch label and the
    /// other classifier neurons.
    DataDependentMinibatch,
}

/// Weights and energy variants of the regularization terms. The default
/// switches every term off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegularizerConfig {
    pub lambda_w: f64,
    pub lambda_h: f64,
    pub lambda_o: f64,
    pub hidden_spec: EnergySpec,
    pub output_spec: EnergySpec,
    pub output_mode: OutputMode,
    /// Use squared neuron norms in the weight-decay term.
    pub squared_weight_decay: bool,
    /// Divide the hidden-layer energy sum by the number of hidden layers.
    pub average_hidden_layers: bool,
}

impl Default for RegularizerConfig {
    fn default() -> Self {
        RegularizerConfig {
            lambda_w: 0.0,
            lambda_h: 0.0,
            lambda_o: 0.0,
            hidden_spec: EnergySpec::default(),
            output_spec: EnergySpec::default(),
            output_mode: OutputMode::FullSum,
            squared_weight_decay: false,
            average_hidden_layers: false,
        }
    }
}

impl RegularizerConfig {
    /// `lambda_h = 10` for full-space or `1` for half-space hidden energy,
    /// `lambda_o = 1`, euclidean `s = 2`, no weight decay.
    pub fn mhe(hidden_space: Space) -> Self {
        RegularizerConfig {
            lambda_h: match hidden_space {
                Space::Full => 10.0,
                Space::Half => 1.0,
            },
            lambda_o: 1.0,
            hidden_spec: EnergySpec::default().with_space(hidden_space),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("lambda_w", self.lambda_w),
            ("lambda_h", self.lambda_h),
            ("lambda_o", self.lambda_o),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(MheError::InvalidConfig(format!(
                    "{name} must be finite and >= 0, got {value}"
                )));
            }
        }
        validate_spec(&self.hidden_spec, LayerRole::Hidden)?;
        validate_spec(&self.output_spec, LayerRole::Output)?;
        if self.hidden_spec.beta.is_some() || self.output_spec.beta.is_some() {
            return Err(MheError::InvalidConfig(
                "per-neuron weights are not supported for network layers".into(),
            ));
        }
        Ok(())
    }
}

/// Unweighted loss terms. `total = data + lambda_h * hidden_mhe +
/// lambda_o * output_mhe + lambda_w * weight_decay`; a term whose lambda is
/// zero is reported as zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub total: f64,
    pub data: f64,
    pub hidden_mhe: f64,
    pub output_mhe: f64,
    pub weight_decay: f64,
}

/// Gradient with the same layout as the model's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradient {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LayerGradient {
    fn zeros(layer: &DenseLayer) -> Self {
        LayerGradient {
            weights: vec![0.0; layer.weights.len()],
            bias: vec![0.0; layer.bias.len()],
        }
    }

    fn add_neuron(&mut self, fan_out: usize, j: usize, scale: f64, g: &[f64]) {
        for (i, gi) in g.iter().enumerate() {
            self.weights[i * fan_out + j] += scale * gi;
        }
    }
}

/// Flattens gradients in [`MlpModel::params`] order.
pub fn flatten_gradient(grads: &[LayerGradient]) -> Vec<f64> {
    grads
        .iter()
        .flat_map(|g| g.weights.iter().chain(&g.bias).copied())
        .collect()
}

/// Softmax cross-entropy of one sample and its gradient w.r.t. the logits.
pub fn cross_entropy(logits: &[f64], label: usize) -> Result<(f64, Vec<f64>)> {
    if label >= logits.len() {
        return Err(MheError::LabelOutOfRange {
            label,
            classes: logits.len(),
        });
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    let loss = sum.ln() - (logits[label] - max);
    let mut grad: Vec<f64> = exps.iter().map(|e| e / sum).collect();
    grad[label] -= 1.0;
    Ok((loss, grad))
}

/// Mean cross-entropy over `batch` and its gradient by backpropagation.
pub(crate) fn data_loss(
    model: &MlpModel,
    data: &SyntheticDataset,
    batch: &[usize],
) -> Result<(f64, Vec<LayerGradient>)> {
    if batch.is_empty() {
        return Err(MheError::EmptyBatch);
    }
    if data.classes() != model.classes() {
        return Err(MheError::DimensionMismatch {
            expected: model.classes(),
            found: data.classes(),
        });
    }
    let layers = model.layers();
    let mut grads: Vec<LayerGradient> = layers.iter().map(LayerGradient::zeros).collect();
    let inv_m = 1.0 / batch.len() as f64;
    let mut loss = 0.0;
    for &index in batch {
        let pass = model.forward(&data.points()[index])?;
        let (sample_loss, mut delta) = cross_entropy(&pass.logits, data.labels()[index])?;
        loss += sample_loss;
        delta.iter_mut().for_each(|d| *d *= inv_m);
        for l in (0..layers.len()).rev() {
            let layer = &layers[l];
            let input = &pass.inputs[l];
            let grad = &mut grads[l];
            for (i, xi) in input.iter().enumerate() {
                let row = &mut grad.weights[i * layer.fan_out..(i + 1) * layer.fan_out];
                for (g, d) in row.iter_mut().zip(&delta) {
                    *g += xi * d;
                }
            }
            for (g, d) in grad.bias.iter_mut().zip(&delta) {
                *g += d;
            }
            if l == 0 {
                break;
            }
            let prev = &layers[l - 1];
            let pre = &pass.pre_activations[l - 1];
            delta = (0..layer.fan_in)
                .map(|i| {
                    let row = &layer.weights[i * layer.fan_out..(i + 1) * layer.fan_out];
                    let back: f64 = row.iter().zip(&delta).map(|(w, d)| w * d).sum();
                    back * prev.activation.derivative(pre[i])
                })
                .collect();
        }
    }
    Ok((loss * inv_m, grads))
}

fn add_energy_term(
    layer: &DenseLayer,
    spec: &EnergySpec,
    scale: f64,
    grad: &mut LayerGradient,
) -> Result<f64> {
    if layer.fan_out < 2 {
        return Ok(0.0);
    }
    let neurons = layer.neurons()?;
    let value = energy(&neurons, spec)?;
    if !value.is_finite() {
        return Err(MheError::NonFiniteEnergy);
    }
    let pair_scale = scale / value.pair_count as f64;
    for (j, g) in energy_gradient(&neurons, spec)?.iter().enumerate() {
        grad.add_neuron(layer.fan_out, j, pair_scale, g);
    }
    Ok(value.normalized)
}

/// Composite objective on the samples indexed by `batch`: mean softmax
/// cross-entropy plus the hidden-layer energy, output-layer energy and
/// weight-decay terms of `reg`. Returns the terms and the gradient for every
/// layer.
pub fn composite_loss(
    model: &MlpModel,
    data: &SyntheticDataset,
    batch: &[usize],
    reg: &RegularizerConfig,
) -> Result<(LossBreakdown, Vec<LayerGradient>)> {
    reg.validate()?;
    let (data_term, mut grads) = data_loss(model, data, batch)?;
    let mut out = LossBreakdown {
        data: data_term,
        ..Default::default()
    };
    let layers = model.layers();
    let last = layers.len() - 1;

    if reg.lambda_h > 0.0 {
        let hidden = model.hidden_layers();
        let per_layer = if reg.average_hidden_layers && !hidden.is_empty() {
            1.0 / hidden.len() as f64
        } else {
            1.0
        };
        for (layer, grad) in hidden.iter().zip(grads.iter_mut()) {
            out.hidden_mhe += per_layer
                * add_energy_term(layer, &reg.hidden_spec, reg.lambda_h * per_layer, grad)?;
        }
    }

    if reg.lambda_o > 0.0 {
        let layer = &layers[last];
        match reg.output_mode {
            OutputMode::FullSum => {
                out.output_mhe =
                    add_energy_term(layer, &reg.output_spec, reg.lambda_o, &mut grads[last])?;
            }
            OutputMode::DataDependentMinibatch => {
                let labels: Vec<usize> = batch.iter().map(|&i| data.labels()[i]).collect();
                let (value, g) =
                    output_minibatch_gradient(&layer.neurons()?, &labels, &reg.output_spec)?;
                if !value.is_finite() {
                    return Err(MheError::NonFiniteEnergy);
                }
                for (j, gj) in g.iter().enumerate() {
                    grads[last].add_neuron(layer.fan_out, j, reg.lambda_o, gj);
                }
                out.output_mhe = value;
            }
        }
    }

    if reg.lambda_w > 0.0 {
        let total_neurons: usize = layers.iter().map(|l| l.fan_out).sum();
        let inv_t = 1.0 / total_neurons as f64;
        let mut offset = 0;
        for (layer, grad) in layers.iter().zip(grads.iter_mut()) {
            for j in 0..layer.fan_out {
                let w = layer.neuron(j);
                let r = norm(&w);
                if reg.squared_weight_decay {
                    out.weight_decay += inv_t * r * r;
                    grad.add_neuron(layer.fan_out, j, 2.0 * reg.lambda_w * inv_t, &w);
                } else {
                    if r <= NORM_EPSILON {
                        return Err(MheError::ZeroNormNeuron { index: offset + j });
                    }
                    out.weight_decay += inv_t * r;
                    grad.add_neuron(layer.fan_out, j, reg.lambda_w * inv_t / r, &w);
                }
            }
            offset += layer.fan_out;
        }
    }

    out.total = out.data
        + reg.lambda_h * out.hidden_mhe
        + reg.lambda_o * out.output_mhe
        + reg.lambda_w * out.weight_decay;
    Ok((out, grads))
}

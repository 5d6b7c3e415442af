use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{MheError, Result};
use crate::neurons::NeuronSet;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Relu,
    Identity,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Identity => z,
        }
    }

    pub(crate) fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

/// Affine layer `y = act(x W + b)`. `weights` is row-major `fan_in x
/// fan_out`; column `j` is neuron `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub fan_in: usize,
    pub fan_out: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn zeros(fan_in: usize, fan_out: usize, activation: Activation) -> Self {
        DenseLayer {
            fan_in,
            fan_out,
            weights: vec![0.0; fan_in * fan_out],
            bias: vec![0.0; fan_out],
            activation,
        }
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.fan_out + j]
    }

    /// Weight vector of neuron `j` (column `j`).
    pub fn neuron(&self, j: usize) -> Vec<f64> {
        (0..self.fan_in).map(|i| self.weight(i, j)).collect()
    }

    /// All neurons of the layer as a set of `fan_out` vectors in
    /// `R^fan_in`.
    pub fn neurons(&self) -> Result<NeuronSet> {
        let mut data = Vec::with_capacity(self.weights.len());
        for j in 0..self.fan_out {
            data.extend(self.neuron(j));
        }
        NeuronSet::from_flat(data, self.fan_in)
    }

    fn pre_activation(&self, x: &[f64]) -> Vec<f64> {
        let mut z = self.bias.clone();
        for (i, xi) in x.iter().enumerate() {
            let row = &self.weights[i * self.fan_out..(i + 1) * self.fan_out];
            for (zj, wij) in z.iter_mut().zip(row) {
                *zj += xi * wij;
            }
        }
        z
    }
}

/// Cached values of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardPass {
    /// Input of every layer; `inputs[0]` is the sample itself.
    pub inputs: Vec<Vec<f64>>,
    /// `x W + b` of every layer, before the activation.
    pub pre_activations: Vec<Vec<f64>>,
    pub logits: Vec<f64>,
}

impl ForwardPass {
    /// Penultimate features: the input of the output layer.
    pub fn features(&self) -> &[f64] {
        self.inputs.last().expect("at least one layer")
    }
}

/// Feedforward classifier. The last layer maps features to one logit per
/// class and has no activation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<DenseLayer>", into = "Vec<DenseLayer>")]
pub struct MlpModel {
    layers: Vec<DenseLayer>,
}

impl TryFrom<Vec<DenseLayer>> for MlpModel {
    type Error = MheError;

    fn try_from(layers: Vec<DenseLayer>) -> Result<Self> {
        MlpModel::new(layers)
    }
}

impl From<MlpModel> for Vec<DenseLayer> {
    fn from(model: MlpModel) -> Self {
        model.layers
    }
}

impl MlpModel {
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self> {
        let last = layers
            .last()
            .ok_or_else(|| MheError::InvalidConfig("model needs at least one layer".into()))?;
        if last.activation != Activation::Identity {
            return Err(MheError::InvalidConfig(
                "the output layer must not have an activation".into(),
            ));
        }
        for layer in &layers {
            if layer.fan_in == 0 || layer.fan_out == 0 {
                return Err(MheError::InvalidConfig("layer dimensions must be positive".into()));
            }
            if layer.weights.len() != layer.fan_in * layer.fan_out {
                return Err(MheError::DimensionMismatch {
                    expected: layer.fan_in * layer.fan_out,
                    found: layer.weights.len(),
                });
            }
            if layer.bias.len() != layer.fan_out {
                return Err(MheError::DimensionMismatch {
                    expected: layer.fan_out,
                    found: layer.bias.len(),
                });
            }
            if layer.weights.iter().chain(&layer.bias).any(|v| !v.is_finite()) {
                return Err(MheError::InvalidConfig("model weights must be finite".into()));
            }
        }
        for pair in layers.windows(2) {
            if pair[0].fan_out != pair[1].fan_in {
                return Err(MheError::DimensionMismatch {
                    expected: pair[0].fan_out,
                    found: pair[1].fan_in,
                });
            }
        }
        Ok(MlpModel { layers })
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].fan_in
    }

    pub fn classes(&self) -> usize {
        self.output_layer().fan_out
    }

    pub fn feature_dim(&self) -> usize {
        self.output_layer().fan_in
    }

    pub fn output_layer(&self) -> &DenseLayer {
        self.layers.last().expect("at least one layer")
    }

    /// Layers whose neurons get the hidden-layer energy.
    pub fn hidden_layers(&self) -> &[DenseLayer] {
        &self.layers[..self.layers.len() - 1]
    }

    pub fn forward(&self, x: &[f64]) -> Result<ForwardPass> {
        if x.len() != self.input_dim() {
            return Err(MheError::DimensionMismatch {
                expected: self.input_dim(),
                found: x.len(),
            });
        }
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre_activations = Vec::with_capacity(self.layers.len());
        let mut current = x.to_vec();
        for layer in &self.layers {
            let z = layer.pre_activation(&current);
            let next = z.iter().map(|&v| layer.activation.apply(v)).collect();
            inputs.push(std::mem::replace(&mut current, next));
            pre_activations.push(z);
        }
        Ok(ForwardPass {
            inputs,
            pre_activations,
            logits: current,
        })
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        let logits = self.forward(x)?.logits;
        Ok(argmax(&logits))
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    /// All parameters, layer by layer, weights before biases.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in &self.layers {
            out.extend_from_slice(&layer.weights);
            out.extend_from_slice(&layer.bias);
        }
        out
    }

    /// Inverse of [`MlpModel::params`].
    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(MheError::DimensionMismatch {
                expected: self.param_count(),
                found: params.len(),
            });
        }
        let mut offset = 0;
        for layer in &mut self.layers {
            let w = layer.weights.len();
            layer.weights.copy_from_slice(&params[offset..offset + w]);
            offset += w;
            let b = layer.bias.len();
            layer.bias.copy_from_slice(&params[offset..offset + b]);
            offset += b;
        }
        Ok(())
    }
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| {
            if v > best.1 {
                (i, v)
            } else {
                best
            }
        })
        .0
}

/// Layer widths and activations of a model to be initialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlpArch {
    /// `[input, hidden..., classes]`.
    pub dims: Vec<usize>,
    #[serde(default)]
    pub hidden_activation: Activation,
    /// Activation of the last hidden layer, whose output is the feature
    /// vector fed to the classifier.
    #[serde(default)]
    pub feature_activation: Activation,
}

impl MlpArch {
    pub fn new(dims: Vec<usize>) -> Self {
        MlpArch {
            dims,
            hidden_activation: Activation::Relu,
            feature_activation: Activation::Relu,
        }
    }

    pub fn with_feature_activation(mut self, activation: Activation) -> Self {
        self.feature_activation = activation;
        self
    }

    /// Gaussian weights with variance `2 / fan_in`, zero biases.
    pub fn he_init(&self, seed: u64) -> Result<MlpModel> {
        if self.dims.len() < 2 {
            return Err(MheError::InvalidConfig(
                "architecture needs an input and an output width".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_layers = self.dims.len() - 1;
        let mut layers = Vec::with_capacity(n_layers);
        for (l, pair) in self.dims.windows(2).enumerate() {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let activation = if l + 1 == n_layers {
                Activation::Identity
            } else if l + 2 == n_layers {
                self.feature_activation
            } else {
                self.hidden_activation
            };
            let mut layer = DenseLayer::zeros(fan_in, fan_out, activation);
            let std = (2.0 / fan_in.max(1) as f64).sqrt();
            let normal = Normal::new(0.0, std)
                .map_err(|e| MheError::InvalidConfig(e.to_string()))?;
            layer.weights.iter_mut().for_each(|w| *w = normal.sample(&mut rng));
            layers.push(layer);
        }
        MlpModel::new(layers)
    }
}

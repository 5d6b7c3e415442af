//! Small feedforward classifier trained with cross-entropy plus
//! hidden-layer energy, output-layer energy and weight decay.

mod data;
mod loss;
mod model;
mod train;

pub use data::{blob_means, make_imbalanced_blobs, sample_blobs, SyntheticDataset};
pub use loss::{
    composite_loss, cross_entropy, flatten_gradient, LayerGradient, LossBreakdown, OutputMode,
    RegularizerConfig,
};
pub use model::{Activation, DenseLayer, ForwardPass, MlpArch, MlpModel};
pub use train::{
    classifier_neuron_angles, evaluate, predictions, train, EpochStats, FeatureRow, TrainConfig,
    TrainReport,
};

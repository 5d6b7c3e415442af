use thiserror::Error;

/// Errors produced by the energy, optimizer and trainer modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MheError {
    #[error("neuron {index} has (near-)zero norm")]
    ZeroNormNeuron { index: usize },

    #[error("neuron set must contain at least {required} vectors, got {found}")]
    TooFewNeurons { required: usize, found: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite component in neuron {index}")]
    NonFiniteWeight { index: usize },

    #[error("Riesz power must be a finite value >= 0, got {0}")]
    InvalidPower(f64),

    #[error("beta has {found} entries but the neuron set has {expected}")]
    BetaLengthMismatch { expected: usize, found: usize },

    #[error("beta entry {index} is not strictly positive")]
    NonPositiveBeta { index: usize },

    #[error("weighted energy is only defined for euclidean distance")]
    GeodesicWithBeta,

    #[error("half-space energy cannot be used on an output layer")]
    HalfSpaceOnOutput,

    #[error("energy is not finite: at least one pair of points coincides")]
    NonFiniteEnergy,

    #[error("mini-batch needs at least 2 neurons, got {size}")]
    BatchTooSmall { size: usize },

    #[error("batch index {index} out of range for {count} neurons")]
    BatchIndexOutOfRange { index: usize, count: usize },

    #[error("batch index {index} appears more than once")]
    DuplicateBatchIndex { index: usize },

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("empty batch")]
    EmptyBatch,

    #[error("no growth regime for s = {s}, d = {d}")]
    InvalidRegime { s: f64, d: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl MheError {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            MheError::ZeroNormNeuron { .. } => "ZeroNormNeuron",
            MheError::TooFewNeurons { .. } => "TooFewNeurons",
            MheError::DimensionMismatch { .. } => "DimensionMismatch",
            MheError::NonFiniteWeight { .. } => "NonFiniteWeight",
            MheError::InvalidPower(_) => "InvalidPower",
            MheError::BetaLengthMismatch { .. } => "BetaLengthMismatch",
            MheError::NonPositiveBeta { .. } => "NonPositiveBeta",
            MheError::GeodesicWithBeta => "GeodesicWithBeta",
            MheError::HalfSpaceOnOutput => "HalfSpaceOnOutput",
            MheError::NonFiniteEnergy => "NonFiniteEnergy",
            MheError::BatchTooSmall { .. } => "BatchTooSmall",
            MheError::BatchIndexOutOfRange { .. } => "BatchIndexOutOfRange",
            MheError::DuplicateBatchIndex { .. } => "DuplicateBatchIndex",
            MheError::LabelOutOfRange { .. } => "LabelOutOfRange",
            MheError::EmptyBatch => "EmptyBatch",
            MheError::InvalidRegime { .. } => "InvalidRegime",
            MheError::InvalidConfig(_) => "InvalidConfig",
        }
    }

    /// Offending element index, for errors that carry one.
    pub fn index(&self) -> Option<usize> {
        match self {
            MheError::ZeroNormNeuron { index }
            | MheError::NonFiniteWeight { index }
            | MheError::NonPositiveBeta { index }
            | MheError::BatchIndexOutOfRange { index, .. }
            | MheError::DuplicateBatchIndex { index } => Some(*index),
            MheError::LabelOutOfRange { label, .. } => Some(*label),
            _ => None,
        }
    }
}

pub type Result<T, E = MheError> = std::result::Result<T, E>;

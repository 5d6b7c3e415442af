//! Minimum hyperspherical energy (MHE).
//!
//! - [`energy`]: every energy variant (Riesz power, euclidean or geodesic
//!   distance, full or half space, per-neuron weights) with exact gradients
//!   with respect to unnormalized weights.
//! - [`sphere`]: projected gradient descent on point configurations, the
//!   regularizer comparison and asymptotic checks.
//! - [`mlp`]: a small feedforward classifier trained with MHE terms on its
//!   hidden and output layers.

pub mod energy;
pub mod error;
pub mod mlp;
pub mod neurons;
pub mod orthonormal;
pub mod sphere;
mod serde_ext;

pub use energy::{
    energy, energy_gradient, minibatch_energy, minibatch_gradient, output_minibatch_energy,
    output_minibatch_gradient, validate_spec, Distance, EnergySpec, EnergyValue, LayerRole, Space,
};
pub use error::{MheError, Result};
pub use neurons::{NeuronSet, NORM_EPSILON};
pub use orthonormal::orthonormal_reg;
pub use serde_ext::ext_real;

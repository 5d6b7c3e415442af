//! Point configurations on hyperspheres: projected gradient descent, the
//! regularizer comparison, weighted-MHE displacement and asymptotic checks.

mod experiments;
mod optimizer;
mod theory;

pub use experiments::{
    compare_regularizers, weighted_displacement_experiment, ComparisonReport, ComparisonRun,
};
pub use optimizer::{
    minimize, minimize_objective, random_sphere_init, EnergyObjective, OptimizerConfig,
    OrthonormalObjective, Snapshot, SphereObjective, StopReason, Trajectory,
    MIN_TRIAL_SEPARATION,
};
pub use theory::{
    asymptotic_check, cap_discrepancy, cap_measure, empirical_minimum_energy, random_caps,
    AsymptoticReport, Cap, GrowthRegime, MinimumEnergy, DEFAULT_CAP_COUNT,
};

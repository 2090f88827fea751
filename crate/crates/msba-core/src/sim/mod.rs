//! Policy evaluation and the synthetic experiment harness.

pub mod experiment;
pub mod generator;
pub mod monte;
pub mod policy;

pub use experiment::{
    build_policy, calibrate_unified, run_experiment, single_stage_lambda, train_msba,
    ExperimentConfig, PolicyKind, ReportRow,
};
pub use generator::{generate, generate_repartitioned, sample_order, GeneratorConfig};
pub use monte::{simulate, MonteCarloOutcome};
pub use policy::{evaluate_expected, Policy, PolicyOutcome, SimError};

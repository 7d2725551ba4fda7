//! Library half of the `ddae` binary: config parsing, command
//! implementations, result documents, and schema validators. Integration
//! and acceptance tests call these directly instead of shelling out.

pub mod commands;
pub mod config;
pub mod result;
pub mod schema;

pub use commands::{
    analyze_steps, evaluate, latent, sweep, train_once, LatentArgs, StepsArgs, StepsOutput,
    SweepOutcome,
};
pub use config::{ExperimentConfig, RawConfig, StandardizeScope};
pub use result::{DatasetInfo, ExperimentResult, SeedOutcome, RESULT_SCHEMA_VERSION};

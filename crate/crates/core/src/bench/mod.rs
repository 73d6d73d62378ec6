//! Simulated bearings-only engagements and the Monte Carlo experiments
//! comparing the possibility particle filter with the standard one.

mod noise;
mod runner;
mod scenario;
mod table1;

pub use noise::NoiseModel;
pub use runner::{
    is_divergent, run_batch, run_single, BatchAggregate, BatchResult, FilterKind, RunReport,
    DIVERGENCE_THRESHOLD_M,
};
pub use scenario::{build_canonical_scenario, synthesize_measurements, Scenario, ScenarioConfig};
pub use table1::{table1_experiment, wilson_interval, Table1Cell, Table1Config, Z_95};

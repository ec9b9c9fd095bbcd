//! Randomness, trial scheduling and experiment plans.

pub mod exec;
pub mod plan;
pub mod rng;

pub use exec::Exec;
pub use plan::{run_plan, run_trials, ExperimentPlan, GroupSummary, PlanGroup, SweepAxes, TrialRow};
pub use rng::{derive_seed, substream, StreamRng};

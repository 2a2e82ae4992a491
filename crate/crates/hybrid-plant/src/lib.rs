//! Configuration, scenario runner and CSV outputs for the hybrid plant
//! dispatch models in `hybrid-plant-core`.

pub mod config;
pub mod curves;
pub mod scenario;
pub mod tables;

pub use config::ScenarioConfig;
pub use scenario::{run_scenario, RunReport, ScenarioError, ScenarioRun, Stage};

//! Scripted scenarios: a small command language and its runner.

pub mod bundled;
mod runner;
mod script;

pub use runner::{apply_due, run_scenario, run_script, run_script_with};
pub use script::{parse_scenario, Command, ScenarioScript};

use crate::engine::EngineError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

//! The seeded tick loop, runtime mutations and metrics.

mod config;
mod metrics;
mod rng;
mod state;

pub use config::SimulationConfig;
pub use metrics::{
    collect_metrics, normalized_score, read_timeseries, timeseries_to_string, write_timeseries,
    DecisionCounts, MetricsFrame, TIMESERIES_HEADER,
};
pub use rng::SimRng;
pub use state::{apportion, Applied, Mutation, Simulation, Snapshot, SNAPSHOT_SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error("invalid config field {field}: {message}")]
    InvalidConfig { field: &'static str, message: String },
    #[error("invalid bundle: {0}")]
    InvalidBundle(String),
    #[error("cannot initialise agent {agent}: {message}")]
    Init { agent: u32, message: String },
    #[error("{field} out of range: {value}")]
    OutOfRange { field: &'static str, value: f64 },
    #[error("format error: {0}")]
    Format(String),
}

impl From<csv::Error> for EngineError {
    fn from(e: csv::Error) -> Self {
        EngineError::Format(e.to_string())
    }
}

impl From<std::io::Error> for EngineError {
    fn from(e: std::io::Error) -> Self {
        EngineError::Format(e.to_string())
    }
}

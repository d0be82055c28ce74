//! Survey ingestion, cleaning and parameter derivation.

mod bundle;
mod clean;
pub mod fixture;
pub mod stats;
mod survey;

use std::path::Path;

pub use bundle::{
    build_bundle, build_bundle_with, calibrate, CalibrationBundle, CalibrationOptions,
    CalibrationReport, BUNDLE_SCHEMA_VERSION, NATIONAL_PERCENT, NATIONAL_SHARES,
};
pub use clean::{clean_records, clean_records_with, CleaningThresholds};
pub use stats::{
    access_probabilities, all_response_median, distance_stats, filter_prototypes, group_medians,
    objective_matrix, priority_means, AccessProb, DistanceStats, PriorityMeans, PrototypeMethod,
};
pub use survey::{
    canonical_columns, parse_survey, prio_column, value_column, write_survey, ColumnMapping,
    ParsedSurvey, RowError, SurveyRecord,
};

use crate::model::Mode;

#[derive(Debug, PartialEq, thiserror::Error)]
pub enum CalibrationError {
    #[error("missing mandatory column {0:?}")]
    MissingColumn(String),
    #[error("no respondents with usual mode {0}")]
    EmptyGroup(Mode),
    #[error("no survey records")]
    NoRecords,
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid bundle: {0}")]
    InvalidBundle(String),
    #[error("csv: {0}")]
    Csv(String),
    #[error("json: {0}")]
    Json(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl CalibrationError {
    pub(crate) fn io(path: &Path, err: std::io::Error) -> Self {
        CalibrationError::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}

impl From<csv::Error> for CalibrationError {
    fn from(e: csv::Error) -> Self {
        CalibrationError::Csv(e.to_string())
    }
}

impl From<serde_json::Error> for CalibrationError {
    fn from(e: serde_json::Error) -> Self {
        CalibrationError::Json(e.to_string())
    }
}

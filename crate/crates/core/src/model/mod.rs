//! Domain types and the per-agent decision procedure.
//!
//! Everything here is pure: no randomness is drawn and no state is shared.

mod decision;
mod history;
mod types;

pub use decision::{
    available_modes, best_mode, choose_mode, effective_filter, perceive, score, Agent, Decision,
    DecisionParams, Draws, ModeSet, BIKE_MAX_KM, DEFAULT_DISRUPTION_PROB, WALK_MAX_KM,
};
pub use history::{habit_strength, usual_mode, TripHistory, DEFAULT_HISTORY_CAPACITY};
pub use types::{
    validate_priorities, Criterion, FilterMatrix, Mode, ModeCriterionMatrix, PerCriterion,
    PerMode, PriorityVector,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("unknown mode {0:?}")]
    UnknownMode(String),
    #[error("unknown criterion {0:?}")]
    UnknownCriterion(String),
    #[error("{what} out of range: {value}")]
    OutOfRange { what: String, value: f64 },
}

use serde::{Deserialize, Serialize};

use super::EngineError;
use crate::model::{DEFAULT_DISRUPTION_PROB, DEFAULT_HISTORY_CAPACITY};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulationConfig {
    pub n_agents: usize,
    pub seed: u64,
    pub history_capacity: usize,
    pub disruption_prob: f64,
    /// Half-width of the multiplicative uniform noise applied to each
    /// initial priority (0.2 means a factor drawn from [0.8, 1.2]).
    pub priority_noise: f64,
    pub biases_on: bool,
    pub habits_on: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            n_agents: 200,
            seed: 42,
            history_capacity: DEFAULT_HISTORY_CAPACITY,
            disruption_prob: DEFAULT_DISRUPTION_PROB,
            priority_noise: 0.20,
            biases_on: true,
            habits_on: true,
        }
    }
}

impl SimulationConfig {
    pub fn with_seed(seed: u64) -> Self {
        SimulationConfig { seed, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |field: &'static str, msg: String| Err(EngineError::InvalidConfig { field, message: msg });
        if self.n_agents == 0 {
            return bad("n_agents", "must be positive".into());
        }
        if self.history_capacity == 0 {
            return bad("history_capacity", "must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.disruption_prob) {
            return bad("disruption_prob", format!("{} outside [0, 1]", self.disruption_prob));
        }
        if !(self.priority_noise >= 0.0 && self.priority_noise.is_finite()) {
            return bad("priority_noise", format!("{} must be finite and >= 0", self.priority_noise));
        }
        Ok(())
    }
}

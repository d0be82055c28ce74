use serde::{Deserialize, Serialize};

use super::config::SimulationConfig;
use super::metrics::{collect_metrics, MetricsFrame};
use super::rng::SimRng;
use super::EngineError;
use crate::calibration::CalibrationBundle;
use crate::model::{
    choose_mode, habit_strength, Agent, Criterion, DecisionParams, Draws, FilterMatrix, Mode,
    ModeCriterionMatrix, PerMode, PriorityVector, TripHistory,
};

pub const SNAPSHOT_SCHEMA_VERSION: u32 = 1;

const MIN_DISTANCE_KM: f64 = 0.3;
const MAX_DISTANCE_KM: f64 = 200.0;
const WALK_USUAL_CAP_KM: f64 = 6.9;
const BIKE_USUAL_CAP_KM: f64 = 14.9;
const MAX_DISTANCE_DRAWS: usize = 10_000;

/// A live simulation: environment, population, switches, clock and random
/// stream. Serializing it yields everything needed to resume bit-exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Simulation {
    pub config: SimulationConfig,
    pub objective: ModeCriterionMatrix,
    pub prototypes: PerMode<FilterMatrix>,
    pub params: DecisionParams,
    pub tick: u64,
    pub agents: Vec<Agent>,
    rng: SimRng,
}

/// A runtime change to the environment or the agents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Mutation {
    SetEnv { mode: Mode, criterion: Criterion, value: f64 },
    SetPriority { criterion: Criterion, target_mean: f64 },
    ResetHabits,
    SetFlags { biases: bool, habits: bool },
}

/// What a mutation actually did.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Applied {
    /// The tick the mutation precedes: it first affects frame `tick + 1`.
    pub tick: u64,
    pub mutation: Mutation,
    /// Population mean after a priority shift (may differ from the target
    /// when values were clamped).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub achieved_mean: Option<f64>,
}

/// Splits `n` by `shares` with largest-remainder rounding; remainder ties go
/// to the earlier mode in canonical order.
pub fn apportion(n: usize, shares: &PerMode<f64>) -> PerMode<usize> {
    let exact = shares.map(|_, s| s * n as f64);
    let mut counts = exact.map(|_, x| x.floor() as usize);
    let assigned: usize = counts.iter().map(|(_, k)| *k).sum();
    let mut order: Vec<Mode> = Mode::ALL.to_vec();
    order.sort_by(|a, b| {
        let ra = exact[*a] - exact[*a].floor();
        let rb = exact[*b] - exact[*b].floor();
        rb.total_cmp(&ra).then(a.cmp(b))
    });
    for m in order.into_iter().cycle().take(n.saturating_sub(assigned)) {
        counts[m] += 1;
    }
    counts
}

impl Simulation {
    /// Builds the population.
    ///
    /// Usual modes are apportioned by the bundle's population shares and
    /// assigned in canonical mode order by agent id. For each agent in id
    /// order the stream yields: six priority-noise uniforms, then standard
    /// normals until the distance lands in [0.3, 200] km, then one uniform
    /// each for car and bus access (always drawn, even when access is
    /// forced by the usual mode).
    pub fn new(bundle: &CalibrationBundle, config: SimulationConfig) -> Result<Self, EngineError> {
        config.validate()?;
        bundle.validate().map_err(|e| EngineError::InvalidBundle(e.to_string()))?;
        let mut rng = SimRng::new(config.seed);
        let counts = apportion(config.n_agents, &bundle.population_shares);
        let usual_modes = Mode::ALL
            .into_iter()
            .flat_map(|m| std::iter::repeat_n(m, counts[m]));

        let mut agents = Vec::with_capacity(config.n_agents);
        for (id, usual) in usual_modes.enumerate() {
            let id = id as u32;
            let noise = config.priority_noise;
            let means = &bundle.priority_means[usual];
            let priorities = PriorityVector::from_fn(|c| {
                let factor = 1.0 - noise + 2.0 * noise * rng.uniform();
                (means[c] * factor).clamp(0.0, 10.0)
            });

            let ds = bundle.distance_stats[usual];
            let mut distance_km = None;
            for _ in 0..MAX_DISTANCE_DRAWS {
                let d = ds.mean_km + ds.sd_km * rng.standard_normal();
                if (MIN_DISTANCE_KM..=MAX_DISTANCE_KM).contains(&d) {
                    distance_km = Some(d);
                    break;
                }
            }
            let Some(mut distance_km) = distance_km else {
                return Err(EngineError::Init {
                    agent: id,
                    message: format!("no distance in [{MIN_DISTANCE_KM}, {MAX_DISTANCE_KM}] km from {ds:?}"),
                });
            };
            match usual {
                Mode::Walk => distance_km = distance_km.min(WALK_USUAL_CAP_KM),
                Mode::Bike => distance_km = distance_km.min(BIKE_USUAL_CAP_KM),
                _ => {}
            }

            let access = bundle.access_prob[usual];
            let car_draw = rng.uniform();
            let bus_draw = rng.uniform();
            let agent = Agent {
                id,
                priorities,
                history: TripHistory::filled(config.history_capacity, usual),
                distance_km,
                has_car_access: usual == Mode::Car || car_draw < access.p_car_access,
                has_bus_access: usual == Mode::Bus || bus_draw < access.p_bus_access,
                current_mode: usual,
                initial_usual_mode: usual,
                last_decision: None,
            };
            if !agent.available_modes().contains(usual) {
                return Err(EngineError::Init {
                    agent: id,
                    message: format!("usual mode {usual} unavailable"),
                });
            }
            agents.push(agent);
        }

        Ok(Simulation {
            config,
            objective: bundle.objective,
            prototypes: bundle.prototypes,
            params: DecisionParams {
                biases_on: config.biases_on,
                habits_on: config.habits_on,
                disruption_prob: config.disruption_prob,
            },
            tick: 0,
            agents,
            rng,
        })
    }

    /// Advances one tick: every agent, in id order, draws its disruption and
    /// habit uniforms and decides. Returns the frame for the new tick.
    pub fn step(&mut self) -> MetricsFrame {
        for agent in &mut self.agents {
            let draws = Draws {
                disrupt: self.rng.uniform(),
                habit: self.rng.uniform(),
            };
            let d = choose_mode(agent, &self.objective, &self.prototypes, self.params, draws);
            agent.current_mode = d.chosen;
            agent.history.push(d.chosen);
            agent.last_decision = Some(d);
        }
        self.tick += 1;
        self.metrics()
    }

    pub fn run(&mut self, ticks: u64) -> Vec<MetricsFrame> {
        (0..ticks).map(|_| self.step()).collect()
    }

    pub fn metrics(&self) -> MetricsFrame {
        collect_metrics(
            self.tick,
            &self.agents,
            &self.objective,
            &self.prototypes,
            self.params.biases_on,
        )
    }

    /// Empties every trip history; the next decisions cannot be routine.
    pub fn reset_habits(&mut self) {
        for a in &mut self.agents {
            a.history.clear();
        }
    }

    pub fn set_objective(&mut self, mode: Mode, criterion: Criterion, value: f64) -> Result<(), EngineError> {
        if !(0.0..=10.0).contains(&value) {
            return Err(EngineError::OutOfRange { field: "value", value });
        }
        self.objective.set(mode, criterion, value);
        Ok(())
    }

    pub fn priority_mean(&self, criterion: Criterion) -> f64 {
        let total: f64 = self.agents.iter().map(|a| a.priorities[criterion]).sum();
        total / self.agents.len() as f64
    }

    /// Moves every agent's priority for `criterion` by the same amount so the
    /// population mean becomes `target_mean`, clamping to [0, 10]. Returns the
    /// mean actually reached.
    pub fn shift_priority(&mut self, criterion: Criterion, target_mean: f64) -> Result<f64, EngineError> {
        if !(0.0..=10.0).contains(&target_mean) {
            return Err(EngineError::OutOfRange { field: "target_mean", value: target_mean });
        }
        let delta = target_mean - self.priority_mean(criterion);
        if delta != 0.0 {
            for a in &mut self.agents {
                a.priorities[criterion] = (a.priorities[criterion] + delta).clamp(0.0, 10.0);
            }
        }
        Ok(self.priority_mean(criterion))
    }

    pub fn set_flags(&mut self, biases_on: bool, habits_on: bool) {
        self.params.biases_on = biases_on;
        self.params.habits_on = habits_on;
    }

    pub fn apply(&mut self, mutation: Mutation) -> Result<Applied, EngineError> {
        let mut achieved_mean = None;
        match mutation {
            Mutation::SetEnv { mode, criterion, value } => self.set_objective(mode, criterion, value)?,
            Mutation::SetPriority { criterion, target_mean } => {
                achieved_mean = Some(self.shift_priority(criterion, target_mean)?);
            }
            Mutation::ResetHabits => self.reset_habits(),
            Mutation::SetFlags { biases, habits } => self.set_flags(biases, habits),
        }
        Ok(Applied { tick: self.tick, mutation, achieved_mean })
    }

    /// Habit strength of each agent's usual mode.
    pub fn habit_strengths(&self) -> Vec<f64> {
        self.agents
            .iter()
            .map(|a| habit_strength(&a.history, a.usual_mode()))
            .collect()
    }

    pub fn to_snapshot(&self) -> Snapshot {
        Snapshot {
            schema_version: SNAPSHOT_SCHEMA_VERSION,
            state: self.clone(),
        }
    }

    pub fn snapshot_json(&self) -> String {
        serde_json::to_string(&self.to_snapshot()).expect("simulation serializes")
    }

    pub fn from_snapshot_json(text: &str) -> Result<Self, EngineError> {
        let snap: Snapshot = serde_json::from_str(text).map_err(|e| EngineError::Format(e.to_string()))?;
        snap.into_simulation()
    }
}

/// Serialized form of a [`Simulation`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub schema_version: u32,
    pub state: Simulation,
}

impl Snapshot {
    pub fn into_simulation(self) -> Result<Simulation, EngineError> {
        if self.schema_version != SNAPSHOT_SCHEMA_VERSION {
            return Err(EngineError::Format(format!(
                "unsupported snapshot schema_version {}",
                self.schema_version
            )));
        }
        let s = self.state;
        s.config.validate()?;
        s.objective
            .validate_values()
            .map_err(|e| EngineError::Format(format!("objective: {e}")))?;
        if s.agents.is_empty() {
            return Err(EngineError::Format("snapshot has no agents".into()));
        }
        Ok(s)
    }
}

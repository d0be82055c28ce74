use serde::{Deserialize, Serialize};

use super::history::{habit_strength, usual_mode, TripHistory};
use super::types::{FilterMatrix, Mode, ModeCriterionMatrix, PerCriterion, PerMode, PriorityVector};
use super::ModelError;

/// Walking is available strictly below this home-work distance.
pub const WALK_MAX_KM: f64 = 7.0;
/// Cycling is available strictly below this home-work distance.
pub const BIKE_MAX_KM: f64 = 15.0;
pub const DEFAULT_DISRUPTION_PROB: f64 = 0.01;

/// A small set of modes backed by a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct ModeSet(u8);

impl ModeSet {
    pub const EMPTY: ModeSet = ModeSet(0);
    pub const ALL: ModeSet = ModeSet(0b1111);

    pub fn contains(self, m: Mode) -> bool {
        self.0 & (1 << m.index()) != 0
    }

    pub fn insert(&mut self, m: Mode) {
        self.0 |= 1 << m.index();
    }

    pub fn remove(&mut self, m: Mode) {
        self.0 &= !(1 << m.index());
    }

    pub fn without(mut self, m: Mode) -> Self {
        self.remove(m);
        self
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Members in canonical order.
    pub fn iter(self) -> impl Iterator<Item = Mode> {
        Mode::ALL.into_iter().filter(move |&m| self.contains(m))
    }
}

impl FromIterator<Mode> for ModeSet {
    fn from_iter<I: IntoIterator<Item = Mode>>(iter: I) -> Self {
        let mut s = ModeSet::EMPTY;
        for m in iter {
            s.insert(m);
        }
        s
    }
}

/// A commuter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub id: u32,
    pub priorities: PriorityVector,
    pub history: TripHistory,
    pub distance_km: f64,
    pub has_car_access: bool,
    pub has_bus_access: bool,
    pub current_mode: Mode,
    pub initial_usual_mode: Mode,
    /// Outcome of the most recent decision, `None` before the first tick.
    #[serde(default)]
    pub last_decision: Option<Decision>,
}

impl Agent {
    pub fn usual_mode(&self) -> Mode {
        usual_mode(&self.history, self.initial_usual_mode)
    }

    pub fn available_modes(&self) -> ModeSet {
        available_modes(self)
    }

    /// The value matrix this agent currently decides on: the objective
    /// matrix seen through its habit-weighted filter when biases are on.
    pub fn decision_basis(
        &self,
        objective: &ModeCriterionMatrix,
        prototypes: &PerMode<FilterMatrix>,
        biases_on: bool,
    ) -> ModeCriterionMatrix {
        if !biases_on {
            return *objective;
        }
        let u = self.usual_mode();
        let h = habit_strength(&self.history, u);
        perceive(objective, &blend_filter(&prototypes[u], h))
    }
}

/// The outcome of one agent's choice in one tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub chosen: Mode,
    pub routine: bool,
    pub biased: bool,
    pub constrained: bool,
}

/// Switches and probabilities governing a decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionParams {
    pub biases_on: bool,
    pub habits_on: bool,
    pub disruption_prob: f64,
}

impl Default for DecisionParams {
    fn default() -> Self {
        DecisionParams {
            biases_on: true,
            habits_on: true,
            disruption_prob: DEFAULT_DISRUPTION_PROB,
        }
    }
}

/// The two uniform draws in `[0, 1)` consumed by one decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Draws {
    pub disrupt: f64,
    pub habit: f64,
}

/// Blends a prototype filter with the neutral (all-ones) filter:
/// `h * prototype + (1 - h)`.
pub fn effective_filter(prototype: &FilterMatrix, h: f64) -> Result<FilterMatrix, ModelError> {
    if !(0.0..=1.0).contains(&h) {
        return Err(ModelError::OutOfRange {
            what: "habit strength".into(),
            value: h,
        });
    }
    Ok(blend_filter(prototype, h))
}

fn blend_filter(prototype: &FilterMatrix, h: f64) -> FilterMatrix {
    // exact endpoints: h = 1 must return the prototype bit-for-bit
    if h == 1.0 {
        return *prototype;
    }
    if h == 0.0 {
        return FilterMatrix::ones();
    }
    prototype.map(|_, _, f| h * f + (1.0 - h))
}

/// Applies a filter to objective values, clamping to `[0, 10]`.
pub fn perceive(objective: &ModeCriterionMatrix, filter: &FilterMatrix) -> ModeCriterionMatrix {
    objective.map(|m, c, v| (v * filter.get(m, c)).clamp(0.0, 10.0))
}

/// Weighted sum of a mode's criterion values by the agent's priorities.
pub fn score(priorities: &PriorityVector, values: &PerCriterion<f64>) -> f64 {
    priorities.iter().map(|(c, p)| p * values[c]).sum()
}

pub fn available_modes(agent: &Agent) -> ModeSet {
    let mut set = ModeSet::EMPTY;
    if agent.distance_km < BIKE_MAX_KM {
        set.insert(Mode::Bike);
    }
    if agent.has_bus_access {
        set.insert(Mode::Bus);
    }
    if agent.has_car_access {
        set.insert(Mode::Car);
    }
    if agent.distance_km < WALK_MAX_KM {
        set.insert(Mode::Walk);
    }
    set
}

/// Highest-scoring mode among `candidates`. Exact ties go to `incumbent` when
/// it is tied, otherwise to the first tied mode in canonical order.
pub fn best_mode(
    priorities: &PriorityVector,
    basis: &ModeCriterionMatrix,
    candidates: ModeSet,
    incumbent: Mode,
) -> Option<Mode> {
    let mut best: Option<(Mode, f64)> = None;
    for m in candidates.iter() {
        let s = score(priorities, basis.row(m));
        best = match best {
            None => Some((m, s)),
            Some((_, bs)) if s > bs => Some((m, s)),
            Some((bm, bs)) if s == bs && m == incumbent && bm != incumbent => Some((m, s)),
            keep => keep,
        };
    }
    best.map(|(m, _)| m)
}

/// One agent's modal choice for one tick.
///
/// The draws are supplied by the caller so the function stays pure. A
/// disruption (draw below `disruption_prob`) removes the usual mode from the
/// options for this decision unless it is the only one left, and also blocks
/// habitual reuse. Otherwise the usual mode is reused without evaluation with
/// probability equal to its habit strength. A re-evaluation scores every
/// available mode on the (possibly biased) basis.
pub fn choose_mode(
    agent: &Agent,
    objective: &ModeCriterionMatrix,
    prototypes: &PerMode<FilterMatrix>,
    params: DecisionParams,
    draws: Draws,
) -> Decision {
    let usual = agent.usual_mode();
    let h = habit_strength(&agent.history, usual);

    let disrupted = draws.disrupt < params.disruption_prob;
    let mut avail = available_modes(agent);
    if disrupted {
        let reduced = avail.without(usual);
        if !reduced.is_empty() {
            avail = reduced;
        }
    }

    if params.habits_on && !disrupted && avail.contains(usual) && draws.habit < h {
        return Decision {
            chosen: usual,
            routine: true,
            biased: false,
            constrained: false,
        };
    }

    let incumbent = agent.current_mode;
    let prio = &agent.priorities;
    let objective_best = best_mode(prio, objective, avail, incumbent);

    let (chosen, biased, global_best) = if params.biases_on {
        let basis = perceive(objective, &blend_filter(&prototypes[usual], h));
        let chosen = best_mode(prio, &basis, avail, incumbent);
        let global = best_mode(prio, &basis, ModeSet::ALL, incumbent);
        (chosen, chosen != objective_best, global)
    } else {
        let global = best_mode(prio, objective, ModeSet::ALL, incumbent);
        (objective_best, false, global)
    };

    // avail is never empty for agents built by the engine
    let chosen = chosen.unwrap_or(incumbent);
    let constrained = global_best.is_some_and(|g| !avail.contains(g));
    Decision {
        chosen,
        routine: false,
        biased,
        constrained,
    }
}

//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

pub mod invariants;

use modechoice::calibration::SurveyRecord;
use modechoice::model::{
    Agent, Criterion, FilterMatrix, Mode, ModeCriterionMatrix, PerMode, PriorityVector, TripHistory,
};
use proptest::prelude::*;

pub fn mode() -> impl Strategy<Value = Mode> {
    prop::sample::select(Mode::ALL.to_vec())
}

pub fn criterion() -> impl Strategy<Value = Criterion> {
    prop::sample::select(Criterion::ALL.to_vec())
}

/// Likert score; half the time on the integer grid so that exact score ties
/// actually occur.
pub fn likert() -> impl Strategy<Value = f64> {
    prop_oneof![(0u8..=10).prop_map(f64::from), 0.0..=10.0f64]
}

pub fn priorities() -> impl Strategy<Value = PriorityVector> {
    prop::array::uniform6(likert()).prop_map(PriorityVector::from_array)
}

pub fn value_matrix() -> impl Strategy<Value = ModeCriterionMatrix> {
    prop::collection::vec(likert(), 24).prop_map(|v| ModeCriterionMatrix::from_fn(|m, c| v[m.index() * 6 + c.index()]))
}

pub fn filter_matrix() -> impl Strategy<Value = FilterMatrix> {
    let factor = prop_oneof![Just(1.0), 0.01..3.0f64];
    prop::collection::vec(factor, 24).prop_map(|v| FilterMatrix::from_fn(|m, c| v[m.index() * 6 + c.index()]))
}

pub fn prototypes() -> impl Strategy<Value = PerMode<FilterMatrix>> {
    prop::array::uniform4(filter_matrix()).prop_map(|[bike, bus, car, walk]| PerMode { bike, bus, car, walk })
}

pub fn history() -> impl Strategy<Value = TripHistory> {
    (1usize..=20, prop::collection::vec(mode(), 0..=25))
        .prop_map(|(cap, trips)| TripHistory::from_trips(cap, trips))
}

pub fn distance() -> impl Strategy<Value = f64> {
    prop_oneof![0.3..200.0f64, Just(7.0), Just(15.0), 6.5..7.5f64, 14.5..15.5f64]
}

/// An agent with at least one available mode.
pub fn agent() -> impl Strategy<Value = Agent> {
    (priorities(), history(), distance(), any::<bool>(), any::<bool>(), mode(), mode()).prop_map(
        |(priorities, history, distance_km, car, bus, current_mode, initial_usual_mode)| {
            let bus = bus || distance_km >= 15.0 && !car;
            Agent {
                id: 0,
                priorities,
                history,
                distance_km,
                has_car_access: car,
                has_bus_access: bus,
                current_mode,
                initial_usual_mode,
                last_decision: None,
            }
        },
    )
}

pub fn unit() -> impl Strategy<Value = f64> {
    prop_oneof![0.0..1.0f64, 0.0..0.02f64, Just(0.0), Just(0.01)]
}

pub fn record() -> impl Strategy<Value = SurveyRecord> {
    (
        mode(),
        prop_oneof![0.0..400.0f64, Just(0.0), Just(30.0), Just(60.0), Just(300.0)],
        any::<bool>(),
        any::<bool>(),
        priorities(),
        value_matrix(),
    )
        .prop_map(|(usual_mode, distance_km, access_car, access_bus, priorities, evaluations)| SurveyRecord {
            usual_mode,
            distance_km,
            trips_per_week: None,
            access_car,
            access_bus,
            priorities,
            evaluations,
        })
}

/// Records covering every usual-mode group with plausible distances.
pub fn survey() -> impl Strategy<Value = Vec<SurveyRecord>> {
    prop::collection::vec(record(), 4..40).prop_map(|mut rs| {
        for (i, r) in rs.iter_mut().enumerate() {
            if i < 4 {
                r.usual_mode = Mode::ALL[i];
            }
            r.distance_km = 0.5 + r.distance_km % 25.0;
        }
        rs
    })
}

/// What the oracle expects from one decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Expected {
    pub chosen: Mode,
    pub routine: bool,
    pub biased: bool,
    pub constrained: bool,
}

fn dot(p: &PriorityVector, m: &ModeCriterionMatrix, mode: Mode) -> f64 {
    let mut acc = 0.0;
    for c in Criterion::ALL {
        acc += p[c] * m.get(mode, c);
    }
    acc
}

/// Exhaustive argmax: the incumbent wins ties it takes part in, otherwise
/// the first tied mode in canonical order.
pub fn argmax(p: &PriorityVector, m: &ModeCriterionMatrix, allowed: [bool; 4], incumbent: Mode) -> Option<Mode> {
    let scored: Vec<(Mode, f64)> = Mode::ALL
        .into_iter()
        .filter(|x| allowed[x.index()])
        .map(|x| (x, dot(p, m, x)))
        .collect();
    let best = scored.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<Mode> = scored.iter().filter(|s| s.1 == best).map(|s| s.0).collect();
    if tied.contains(&incumbent) {
        Some(incumbent)
    } else {
        tied.first().copied()
    }
}

pub fn oracle_usual(trips: &[Mode], fallback: Mode) -> Mode {
    let mut counts = [0usize; 4];
    for t in trips {
        counts[t.index()] += 1;
    }
    let top = *counts.iter().max().unwrap();
    if top == 0 {
        return fallback;
    }
    *trips.iter().rev().find(|t| counts[t.index()] == top).unwrap()
}

/// Independent re-derivation of a single decision.
#[allow(clippy::too_many_arguments)]
pub fn oracle_decide(
    a: &Agent,
    objective: &ModeCriterionMatrix,
    protos: &PerMode<FilterMatrix>,
    biases: bool,
    habits: bool,
    disruption_prob: f64,
    u_disrupt: f64,
    u_habit: f64,
) -> Expected {
    let trips: Vec<Mode> = a.history.iter().collect();
    let usual = oracle_usual(&trips, a.initial_usual_mode);
    let h = if trips.is_empty() {
        0.0
    } else {
        trips.iter().filter(|&&t| t == usual).count() as f64 / trips.len() as f64
    };
    let mut allowed = [a.distance_km < 15.0, a.has_bus_access, a.has_car_access, a.distance_km < 7.0];
    let disrupted = u_disrupt < disruption_prob;
    if disrupted {
        let mut reduced = allowed;
        reduced[usual.index()] = false;
        if reduced.iter().any(|&x| x) {
            allowed = reduced;
        }
    }
    if habits && !disrupted && allowed[usual.index()] && u_habit < h {
        return Expected { chosen: usual, routine: true, biased: false, constrained: false };
    }
    let inc = a.current_mode;
    let objective_best = argmax(&a.priorities, objective, allowed, inc);
    let basis = if biases {
        ModeCriterionMatrix::from_fn(|m, c| {
            let f = h * protos[usual].get(m, c) + (1.0 - h);
            (objective.get(m, c) * f).clamp(0.0, 10.0)
        })
    } else {
        *objective
    };
    let chosen = argmax(&a.priorities, &basis, allowed, inc).unwrap();
    let global = argmax(&a.priorities, &basis, [true; 4], inc).unwrap();
    Expected {
        chosen,
        routine: false,
        biased: biases && Some(chosen) != objective_best,
        constrained: !allowed[global.index()],
    }
}

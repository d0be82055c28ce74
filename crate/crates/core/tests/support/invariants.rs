//! Every documented invariant as a runnable property. Shared by the
//! `properties` test target and the acceptance suite.

use modechoice::calibration::{
    build_bundle, clean_records, group_medians, objective_matrix, CalibrationBundle, NATIONAL_SHARES,
};
use modechoice::engine::apportion;
use modechoice::model::{
    choose_mode, effective_filter, habit_strength, perceive, score, Criterion, DecisionParams, Draws,
    FilterMatrix, Mode, ModeCriterionMatrix, PerMode, TripHistory,
};
use modechoice::{Simulation, SimulationConfig};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use super::*;

pub type Check = fn(&mut TestRunner) -> Result<(), String>;

pub const CASES: u32 = 1000;

pub const ALL: &[(&str, Check)] = &[
    ("habit strength bounded, frequencies sum to 1", habit_strength_bounds),
    ("history never exceeds capacity", history_capacity),
    ("filter endpoints exact and entries between 1 and prototype", filter_endpoints),
    ("perceive clamps and is identity under the neutral filter", perceive_clamp_identity),
    ("score linear in priorities, argmax scale-invariant", score_linearity),
    ("unbiased habit-free choice is the objective argmax", choose_matches_argmax),
    ("choose_mode is pure", choose_is_pure),
    ("routine decisions reuse a mode from history and carry no flags", routine_properties),
    ("population shares sum to 1 and apportion exactly", shares_sum_to_one),
    ("cleaning is idempotent", cleaning_idempotent),
    ("objective within the hull of group medians", objective_in_hull),
    ("derived probabilities, factors and distances are valid", derived_values_valid),
    ("calibration is deterministic", calibration_deterministic),
    ("engine runs are deterministic", engine_deterministic),
    ("modal shares and decision counts are conserved", engine_conservation),
    ("full habits without disruption are a fixed point", engine_fixed_point),
    ("reset leaves no routine and single-entry histories", engine_reset),
    ("raising bike safety never shrinks the bike choosers", monotone_bike_safety),
];

pub fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() })
}

fn check<S: Strategy>(
    runner: &mut TestRunner,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn habit_strength_bounds(r: &mut TestRunner) -> Result<(), String> {
    check(r, history(), |h| {
        let total: f64 = Mode::ALL.iter().map(|&m| habit_strength(&h, m)).sum();
        for m in Mode::ALL {
            let s = habit_strength(&h, m);
            prop_assert!((0.0..=1.0).contains(&s));
        }
        let want = if h.is_empty() { 0.0 } else { 1.0 };
        prop_assert!((total - want).abs() < 1e-12, "sum {total}");
        Ok(())
    })
}

fn history_capacity(r: &mut TestRunner) -> Result<(), String> {
    check(r, (1usize..=30, prop::collection::vec(mode(), 0..80)), |(cap, trips)| {
        let mut h = TripHistory::new(cap);
        for t in &trips {
            h.push(*t);
            prop_assert!(h.len() <= cap);
        }
        let kept: Vec<Mode> = h.iter().collect();
        let tail = &trips[trips.len().saturating_sub(cap)..];
        prop_assert_eq!(kept.as_slice(), tail);
        Ok(())
    })
}

fn filter_endpoints(r: &mut TestRunner) -> Result<(), String> {
    check(r, (filter_matrix(), 0.0..=1.0f64), |(p, h)| {
        prop_assert_eq!(effective_filter(&p, 0.0).unwrap(), FilterMatrix::ones());
        prop_assert_eq!(effective_filter(&p, 1.0).unwrap(), p);
        let f = effective_filter(&p, h).unwrap();
        for (m, c, v) in f.entries() {
            let proto = p.get(m, c);
            prop_assert!(v >= proto.min(1.0) - 1e-15 && v <= proto.max(1.0) + 1e-15);
        }
        prop_assert!(effective_filter(&p, 1.0 + 1e-9).is_err());
        prop_assert!(effective_filter(&p, -1e-9).is_err());
        Ok(())
    })
}

fn perceive_clamp_identity(r: &mut TestRunner) -> Result<(), String> {
    let wide = prop::collection::vec(0.0..50.0f64, 24).prop_map(|v| FilterMatrix::from_fn(|m, c| v[m.index() * 6 + c.index()]));
    check(r, (value_matrix(), wide), |(x, f)| {
        prop_assert_eq!(perceive(&x, &FilterMatrix::ones()), x);
        for (m, c, v) in perceive(&x, &f).entries() {
            prop_assert!((0.0..=10.0).contains(&v));
            prop_assert_eq!(v, (x.get(m, c) * f.get(m, c)).min(10.0));
        }
        Ok(())
    })
}

fn score_linearity(r: &mut TestRunner) -> Result<(), String> {
    check(r, (priorities(), value_matrix(), 0.0..20.0f64, 0.01..20.0f64), |(p, v, alpha, beta)| {
        for m in Mode::ALL {
            let scaled = p.map(|_, x| alpha * x);
            let lhs = score(&scaled, v.row(m));
            let rhs = alpha * score(&p, v.row(m));
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
        }
        // exact ties can break differently after rounding, so compare scores
        let p2 = p.map(|_, x| beta * x);
        let a1 = argmax(&p, &v, [true; 4], Mode::Bike).unwrap();
        let a2 = argmax(&p2, &v, [true; 4], Mode::Bike).unwrap();
        let (s1, s2) = (score(&p, v.row(a1)), score(&p, v.row(a2)));
        prop_assert!((s1 - s2).abs() <= 1e-9 * (1.0 + s1.abs()), "{a1} vs {a2}");
        Ok(())
    })
}

fn choose_matches_argmax(r: &mut TestRunner) -> Result<(), String> {
    check(r, (agent(), value_matrix(), 0.01..1.0f64, unit()), |(a, obj, ud, uh)| {
        let params = DecisionParams { biases_on: false, habits_on: false, disruption_prob: 0.01 };
        let protos = PerMode::from_fn(|_| FilterMatrix::ones());
        let d = choose_mode(&a, &obj, &protos, params, Draws { disrupt: ud, habit: uh });
        let allowed = [a.distance_km < 15.0, a.has_bus_access, a.has_car_access, a.distance_km < 7.0];
        prop_assert_eq!(Some(d.chosen), argmax(&a.priorities, &obj, allowed, a.current_mode));
        prop_assert!(!d.routine && !d.biased);
        Ok(())
    })
}

fn choose_is_pure(r: &mut TestRunner) -> Result<(), String> {
    check(r, (agent(), value_matrix(), prototypes(), any::<(bool, bool)>(), unit(), unit()), |(a, obj, protos, (b, h), ud, uh)| {
        let params = DecisionParams { biases_on: b, habits_on: h, disruption_prob: 0.01 };
        let before = a.clone();
        let draws = Draws { disrupt: ud, habit: uh };
        let d1 = choose_mode(&a, &obj, &protos, params, draws);
        let d2 = choose_mode(&a, &obj, &protos, params, draws);
        prop_assert_eq!(d1, d2);
        prop_assert_eq!(a, before);
        Ok(())
    })
}

fn routine_properties(r: &mut TestRunner) -> Result<(), String> {
    check(r, (agent(), value_matrix(), prototypes(), any::<bool>(), unit(), unit()), |(a, obj, protos, b, ud, uh)| {
        let params = DecisionParams { biases_on: b, habits_on: true, disruption_prob: 0.01 };
        let d = choose_mode(&a, &obj, &protos, params, Draws { disrupt: ud, habit: uh });
        if d.routine {
            prop_assert!(a.history.iter().any(|m| m == d.chosen));
            prop_assert!(!d.biased && !d.constrained);
        }
        prop_assert!(a.available_modes().contains(d.chosen));
        Ok(())
    })
}

fn shares_sum_to_one(r: &mut TestRunner) -> Result<(), String> {
    let weights = prop::array::uniform4(0.001..1.0f64);
    check(r, (weights, 0usize..5000), |(w, n)| {
        let total: f64 = w.iter().sum();
        let shares = PerMode { bike: w[0] / total, bus: w[1] / total, car: w[2] / total, walk: w[3] / total };
        let s: f64 = shares.iter().map(|(_, x)| *x).sum();
        prop_assert!((s - 1.0).abs() < 1e-9);
        let counts = apportion(n, &shares);
        prop_assert_eq!(counts.iter().map(|(_, k)| *k).sum::<usize>(), n);
        for (m, k) in counts.iter() {
            prop_assert!((*k as f64 - shares[m] * n as f64).abs() < 1.0);
        }
        let b = CalibrationBundle::reference();
        let s: f64 = b.population_shares.iter().map(|(_, x)| *x).sum();
        prop_assert!((s - 1.0).abs() < 1e-9);
        Ok(())
    })
}

fn cleaning_idempotent(r: &mut TestRunner) -> Result<(), String> {
    check(r, prop::collection::vec(record(), 0..30), |rs| {
        let once = clean_records(&rs);
        prop_assert_eq!(clean_records(&once), once.clone());
        for x in &once {
            prop_assert!(x.distance_km > 0.0 && x.distance_km < 300.0);
        }
        Ok(())
    })
}

fn objective_in_hull(r: &mut TestRunner) -> Result<(), String> {
    let weights = prop::array::uniform4(0.0..1.0f64).prop_filter("nonzero", |w| w.iter().sum::<f64>() > 1e-3);
    check(r, (survey(), weights), |(rs, w)| {
        let t: f64 = w.iter().sum();
        let mut shares = PerMode { bike: w[0] / t, bus: w[1] / t, car: w[2] / t, walk: w[3] / t };
        let drift: f64 = 1.0 - shares.iter().map(|(_, x)| *x).sum::<f64>();
        shares.car += drift;
        let med = group_medians(&rs).unwrap();
        for sh in [shares, NATIONAL_SHARES] {
            let obj = objective_matrix(&rs, &sh).unwrap();
            for (m, c, v) in obj.entries() {
                let vals: Vec<f64> = Mode::ALL.iter().map(|&g| med[g].get(m, c)).collect();
                let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(v >= lo - 1e-9 && v <= hi + 1e-9, "{m} {c}: {v} not in [{lo}, {hi}]");
            }
        }
        Ok(())
    })
}

fn derived_values_valid(r: &mut TestRunner) -> Result<(), String> {
    check(r, survey(), |rs| {
        let b = build_bundle(&rs).unwrap();
        for (g, p) in b.access_prob.iter() {
            prop_assert!((0.0..=1.0).contains(&p.p_car_access) && (0.0..=1.0).contains(&p.p_bus_access));
            let min = rs.iter().filter(|x| x.usual_mode == g).map(|x| x.distance_km).fold(f64::INFINITY, f64::min);
            prop_assert!(b.distance_stats[g].mean_km >= min - 1e-9);
        }
        for (_, proto) in b.prototypes.iter() {
            prop_assert!(proto.entries().all(|(_, _, f)| f > 0.0 && f.is_finite()));
        }
        prop_assert!(b.objective.entries().all(|(_, _, v)| (0.0..=10.0).contains(&v)));
        Ok(())
    })
}

fn calibration_deterministic(r: &mut TestRunner) -> Result<(), String> {
    check(r, survey(), |rs| {
        let a = build_bundle(&rs).unwrap();
        let b = build_bundle(&rs.clone()).unwrap();
        prop_assert_eq!(a.to_json(), b.to_json());
        Ok(())
    })
}

fn small_config() -> impl Strategy<Value = SimulationConfig> {
    (any::<u64>(), 1usize..40, any::<(bool, bool)>()).prop_map(|(seed, n, (b, h))| SimulationConfig {
        n_agents: n,
        biases_on: b,
        habits_on: h,
        ..SimulationConfig::with_seed(seed)
    })
}

fn engine_deterministic(r: &mut TestRunner) -> Result<(), String> {
    check(r, small_config(), |cfg| {
        let bundle = CalibrationBundle::reference();
        let mut a = Simulation::new(&bundle, cfg).unwrap();
        let mut b = Simulation::new(&bundle, cfg).unwrap();
        prop_assert_eq!(a.run(8), b.run(8));
        prop_assert_eq!(a, b);
        Ok(())
    })
}

fn engine_conservation(r: &mut TestRunner) -> Result<(), String> {
    check(r, small_config(), |cfg| {
        let mut sim = Simulation::new(&CalibrationBundle::reference(), cfg).unwrap();
        for f in sim.run(6) {
            let s: f64 = f.modal_share.iter().map(|(_, x)| *x).sum();
            prop_assert!((s - 1.0).abs() < 1e-9);
            let d = f.decisions;
            let non_routine = cfg.n_agents - d.routine;
            prop_assert!(d.rational + d.biased.max(d.constrained) <= non_routine);
            prop_assert!(d.rational + d.biased + d.constrained >= non_routine);
            for (m, s) in f.satisfaction.iter() {
                prop_assert_eq!(s.is_some(), f.modal_share[m] > 0.0);
            }
        }
        for a in &sim.agents {
            prop_assert!(a.available_modes().contains(a.current_mode));
        }
        Ok(())
    })
}

fn engine_fixed_point(r: &mut TestRunner) -> Result<(), String> {
    check(r, small_config(), |cfg| {
        let cfg = SimulationConfig { disruption_prob: 0.0, habits_on: true, ..cfg };
        let mut sim = Simulation::new(&CalibrationBundle::reference(), cfg).unwrap();
        let start = sim.metrics().modal_share;
        for f in sim.run(5) {
            prop_assert_eq!(f.modal_share, start);
            prop_assert_eq!(f.decisions.routine, cfg.n_agents);
        }
        Ok(())
    })
}

fn engine_reset(r: &mut TestRunner) -> Result<(), String> {
    check(r, (small_config(), 0u64..6), |(cfg, warmup)| {
        let mut sim = Simulation::new(&CalibrationBundle::reference(), cfg).unwrap();
        sim.run(warmup);
        sim.reset_habits();
        let f = sim.step();
        prop_assert_eq!(f.decisions.routine, 0);
        prop_assert!(sim.agents.iter().all(|a| a.history.len() == 1));
        Ok(())
    })
}

fn monotone_bike_safety(r: &mut TestRunner) -> Result<(), String> {
    check(r, (agent(), value_matrix(), 0.0..=10.0f64, 0.0..=10.0f64), |(a, obj, s1, s2)| {
        let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
        let params = DecisionParams { biases_on: false, habits_on: false, disruption_prob: 0.0 };
        let protos = PerMode::from_fn(|_| FilterMatrix::ones());
        let draws = Draws { disrupt: 0.5, habit: 0.5 };
        let with = |v: f64| {
            let mut o: ModeCriterionMatrix = obj;
            o.set(Mode::Bike, Criterion::Safety, v);
            choose_mode(&a, &o, &protos, params, draws).chosen
        };
        if with(lo) == Mode::Bike {
            prop_assert_eq!(with(hi), Mode::Bike);
        }
        Ok(())
    })
}

/// Runs the whole catalogue; returns the names of failing invariants with
/// their messages.
pub fn run_all(cases: u32) -> Vec<(&'static str, Result<(), String>)> {
    ALL.iter()
        .map(|(name, f)| {
            let mut r = runner(cases);
            (*name, f(&mut r))
        })
        .collect()
}

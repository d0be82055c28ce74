//! Acceptance suite. Prints one line per criterion and exits non-zero when
//! any criterion fails. Criteria needing external data are skipped when the
//! data is absent.
//!
//! Environment:
//! * `MODECHOICE_SURVEY_CSV`: path to the published survey export.
//! * `MODECHOICE_SURVEY_MAPPING`: optional column mapping for it (JSON).

mod support;

use std::cell::RefCell;
use std::path::Path;
use std::time::{Duration, Instant};

use modechoice::calibration::fixture::SurveyPlan;
use modechoice::calibration::{
    calibrate, group_medians, write_survey, CalibrationOptions, ColumnMapping, NATIONAL_SHARES,
};
use modechoice::engine::{timeseries_to_string, MetricsFrame};
use modechoice::model::{
    choose_mode, score, Agent, DecisionParams, Draws, FilterMatrix, Mode, ModeCriterionMatrix, PerMode,
};
use modechoice::scenario::{bundled, run_script_with};
use modechoice::{CalibrationBundle, ScenarioScript, Simulation, SimulationConfig};
use proptest::prelude::*;
use support::invariants;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

use Outcome::*;

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok { Pass(detail) } else { Fail(detail) }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed < limit {
        Ok(())
    } else {
        Err(format!("took {elapsed:?}, limit {limit:?}"))
    }
}

fn bundle() -> CalibrationBundle {
    CalibrationBundle::reference()
}

/// Frames 0..=end of a bundled script (frame 0 is the initial state).
fn run_bundled(name: &str, seed: u64) -> (Vec<MetricsFrame>, Simulation) {
    let script = ScenarioScript::parse(bundled::find(name).expect("bundled").text).expect("parses");
    let mut sim = Simulation::new(&bundle(), SimulationConfig::with_seed(seed)).expect("init");
    let mut frames = vec![sim.metrics()];
    frames.extend(run_script_with(&mut sim, &script, |_, _| {}).expect("runs"));
    (frames, sim)
}

fn real_dataset() -> Outcome {
    let Ok(path) = std::env::var("MODECHOICE_SURVEY_CSV") else {
        return Skip("MODECHOICE_SURVEY_CSV not set".into());
    };
    let mapping = match std::env::var("MODECHOICE_SURVEY_MAPPING") {
        Ok(m) => match ColumnMapping::from_json_file(Path::new(&m)) {
            Ok(m) => m,
            Err(e) => return Fail(format!("mapping: {e}")),
        },
        Err(_) => ColumnMapping::identity(),
    };
    let t = Instant::now();
    let file = match std::fs::File::open(&path) {
        Ok(f) => f,
        Err(e) => return Fail(format!("{path}: {e}")),
    };
    let report = match calibrate(file, &mapping, &CalibrationOptions::default()) {
        Ok(r) => r,
        Err(e) => return Fail(e.to_string()),
    };
    let elapsed = t.elapsed();
    let b = &report.bundle;
    let mut problems = Vec::new();
    let counts = b.sample_counts.expect("counts");
    let want_n = [(Mode::Bike, 204), (Mode::Car, 134), (Mode::Bus, 228), (Mode::Walk, 84)];
    for (m, n) in want_n {
        if counts[m] != n {
            problems.push(format!("{m} n={} want {n}", counts[m]));
        }
    }
    let near = |got: f64, want: f64| (got - want).abs() <= 0.01;
    let distances = [(Mode::Bike, 6.43, 5.0), (Mode::Walk, 1.8, 1.5), (Mode::Car, 21.29, 15.0), (Mode::Bus, 11.16, 5.55)];
    for (m, mean, median) in distances {
        let d = b.distance_stats[m];
        if !near(d.mean_km, mean) || !near(d.median_km, median) {
            problems.push(format!("{m} distance {:.3}/{:.3} want {mean}/{median}", d.mean_km, d.median_km));
        }
    }
    if !near(b.priority_means.car.ecology, 5.65) {
        problems.push(format!("car ecology priority {:.3}", b.priority_means.car.ecology));
    }
    if !near(b.overall_priorities.ecology, 7.08) {
        problems.push(format!("overall ecology priority {:.3}", b.overall_priorities.ecology));
    }
    if !near(1.0 - b.access_prob.car.p_bus_access, 0.6119) {
        problems.push(format!("car users without bus {:.4}", 1.0 - b.access_prob.car.p_bus_access));
    }
    if let Err(e) = within(elapsed, Duration::from_secs(5)) {
        problems.push(e);
    }
    verdict(problems.is_empty(), if problems.is_empty() { format!("{} records in {elapsed:?}", report.records.len()) } else { problems.join("; ") })
}

fn fixture_recovery() -> Outcome {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/survey_fixture.csv");
    let text = match std::fs::read(&path) {
        Ok(t) => t,
        Err(e) => return Fail(format!("{}: {e}", path.display())),
    };
    let plan = SurveyPlan::reference();
    let mut regenerated = Vec::new();
    write_survey(&plan.generate().expect("plan is feasible"), &mut regenerated).expect("in-memory");
    if regenerated != text {
        return Fail("data/survey_fixture.csv differs from the generator output".into());
    }

    let t = Instant::now();
    let report = match calibrate(text.as_slice(), &ColumnMapping::identity(), &CalibrationOptions::default()) {
        Ok(r) => r,
        Err(e) => return Fail(e.to_string()),
    };
    let elapsed = t.elapsed();
    let b = &report.bundle;
    let mut worst = 0.0f64;
    let mut note = |got: f64, want: f64| worst = worst.max((got - want).abs());

    let medians = group_medians(&report.records).expect("groups");
    for g in Mode::ALL {
        let p = &plan.groups[g];
        for (m, c, v) in p.eval_median.entries() {
            note(medians[g].get(m, c), v);
        }
        for (c, v) in p.priority_mean.iter() {
            note(b.priority_means[g][c], *v);
        }
        note(b.distance_stats[g].mean_km, p.distance.mean_km);
        note(b.distance_stats[g].median_km, p.distance.median_km);
        note(b.distance_stats[g].sd_km, p.distance.sd_km);
    }
    // objective: share-weighted planted medians
    for (m, c, v) in b.objective.entries() {
        let want: f64 = Mode::ALL.iter().map(|&g| NATIONAL_SHARES[g] * plan.groups[g].eval_median.get(m, c)).sum();
        note(v, want);
    }
    // prototypes: planted group mean over a brute-force all-response median
    for (m, c, _) in b.objective.entries() {
        let mut col: Vec<f64> = report.records.iter().map(|r| r.evaluations.get(m, c)).collect();
        col.sort_by(f64::total_cmp);
        let n = col.len();
        let med = if n % 2 == 1 { col[n / 2] } else { 0.5 * (col[n / 2 - 1] + col[n / 2]) };
        for g in Mode::ALL {
            note(b.prototypes[g].get(m, c), plan.groups[g].eval_mean.get(m, c) / med);
        }
    }

    let mut problems = Vec::new();
    for g in Mode::ALL {
        let (car, bus) = plan.access_fraction(g);
        let got = b.access_prob[g];
        if got.p_car_access != car || got.p_bus_access != bus {
            problems.push(format!("{g} access {:?} want ({car}, {bus})", got));
        }
        if b.sample_counts.map(|c| c[g]) != Some(plan.groups[g].n) {
            problems.push(format!("{g} count"));
        }
    }
    if worst > 1e-6 {
        problems.push(format!("max deviation {worst:e}"));
    }
    if let Err(e) = within(elapsed, Duration::from_secs(1)) {
        problems.push(e);
    }
    if problems.is_empty() {
        Pass(format!("650 rows, max deviation {worst:.1e}, access exact, {elapsed:?}"))
    } else {
        Fail(problems.join("; "))
    }
}

/// (cases, agreements) per oracle comparison.
#[derive(Default)]
struct OracleCounts {
    unbiased: (usize, usize),
    biased: (usize, usize),
    full: (usize, usize),
}

impl OracleCounts {
    fn tally(
        &mut self,
        a: &Agent,
        obj: &ModeCriterionMatrix,
        protos: &PerMode<FilterMatrix>,
        (b, h): (bool, bool),
        ud: f64,
        uh: f64,
    ) {
        let params = DecisionParams { biases_on: b, habits_on: h, disruption_prob: 0.01 };
        let d = choose_mode(a, obj, protos, params, Draws { disrupt: ud, habit: uh });
        let e = support::oracle_decide(a, obj, protos, b, h, 0.01, ud, uh);
        self.full.0 += 1;
        self.full.1 += usize::from(
            d.chosen == e.chosen && d.routine == e.routine && d.biased == e.biased && d.constrained == e.constrained,
        );
        if !b && !h && ud >= 0.01 {
            let allowed = [a.distance_km < 15.0, a.has_bus_access, a.has_car_access, a.distance_km < 7.0];
            self.unbiased.0 += 1;
            self.unbiased.1 += usize::from(Some(d.chosen) == support::argmax(&a.priorities, obj, allowed, a.current_mode));
        }
        if b && !d.routine {
            self.biased.0 += 1;
            self.biased.1 += usize::from(d.biased == e.biased);
        }
    }
}

fn decision_oracle() -> Outcome {
    let t = Instant::now();
    let strategy = (
        support::agent(),
        support::value_matrix(),
        support::prototypes(),
        any::<(bool, bool)>(),
        support::unit(),
        support::unit(),
    );
    let mut runner = invariants::runner(10_000);
    let counts = RefCell::new(OracleCounts::default());
    let result = runner.run(&strategy, |(a, obj, protos, flags, ud, uh)| {
        let mut c = counts.borrow_mut();
        c.tally(&a, &obj, &protos, flags, ud, uh);
        // the unbiased case is also exercised on every generated agent
        c.tally(&a, &obj, &protos, (false, false), 0.5, uh);
        Ok(())
    });
    let OracleCounts { unbiased, biased, full } = counts.into_inner();
    let elapsed = t.elapsed();
    let ok = result.is_ok()
        && unbiased.0 == unbiased.1
        && biased.0 == biased.1
        && full.0 == full.1
        && full.0 >= 10_000
        && elapsed < Duration::from_secs(5);
    verdict(
        ok,
        format!(
            "argmax {}/{}, biased flag {}/{}, full decision {}/{}, {elapsed:?}",
            unbiased.1, unbiased.0, biased.1, biased.0, full.1, full.0
        ),
    )
}

fn determinism() -> Outcome {
    let t = Instant::now();
    let (a, _) = run_bundled("bike-safety", 42);
    let (b, _) = run_bundled("bike-safety", 42);
    let csv_a = timeseries_to_string(&a[1..]);
    let csv_b = timeseries_to_string(&b[1..]);
    if csv_a != csv_b || a.len() != 501 {
        return Fail("two runs differ".into());
    }

    let script = ScenarioScript::parse(bundled::BIKE_SAFETY).unwrap();
    let mut sim = Simulation::new(&bundle(), SimulationConfig::with_seed(42)).unwrap();
    let mut snapshot = None;
    run_script_with(&mut sim, &script, |s, _| {
        if s.tick == 250 {
            snapshot = Some(s.snapshot_json());
        }
    })
    .unwrap();
    let mut resumed = Simulation::from_snapshot_json(&snapshot.expect("tick 250 reached")).unwrap();
    let mut replay = vec![resumed.metrics()];
    replay.extend(run_script_with(&mut resumed, &script, |_, _| {}).unwrap());
    let elapsed = t.elapsed();
    let same = timeseries_to_string(&replay) == timeseries_to_string(&a[250..]) && resumed == sim;
    verdict(
        same && elapsed < Duration::from_secs(2),
        format!("500-tick CSV identical ({} bytes), replay from 250 identical: {same}, {elapsed:?}", csv_a.len()),
    )
}

fn reset_semantics() -> Outcome {
    let mut checked = 0;
    let mut problems = Vec::new();
    let mut runs: Vec<(u64, String, u64)> = vec![(42, bundled::BIKE_SAFETY.into(), 100), (42, bundled::CAR_COMFORT.into(), 220)];
    for seed in 0..10u64 {
        let at = 1 + seed * 7;
        let flags = ["on", "off"][(seed % 2) as usize];
        runs.push((seed, format!("at 0 set-flags biases={flags} habits=on\nat {at} reset-habits\nrun-until {}", at + 5), at));
    }
    for (seed, text, at) in runs {
        let script = ScenarioScript::parse(&text).unwrap();
        let mut sim = Simulation::new(&bundle(), SimulationConfig::with_seed(seed)).unwrap();
        run_script_with(&mut sim, &script, |s, f| {
            if f.tick == at + 1 {
                checked += 1;
                if f.decisions.routine != 0 || s.agents.iter().any(|a| a.history.len() != 1) {
                    problems.push(format!("seed {seed} reset at {at}: routine {}", f.decisions.routine));
                }
            }
        })
        .unwrap();
    }
    verdict(problems.is_empty() && checked == 12, format!("{checked} resets checked {}", problems.join("; ")))
}

fn scenario_1() -> Outcome {
    let (f, _) = run_bundled("bike-safety", 42);
    let bike = |t: usize| f[t].modal_share.bike;
    let jump = bike(105) - bike(100);
    let before = bike(100) - bike(50);
    let routine_after = f[101].decisions.routine;
    verdict(
        bike(200) >= bike(0) && jump >= before && routine_after == 0,
        format!(
            "bike {:.3} -> {:.3} at 200; +{jump:.3} within 5 ticks of the reset vs +{before:.3} over the 50 before; routine at 101 = {routine_after}",
            bike(0),
            bike(200)
        ),
    )
}

/// Car users who have bus access although car is not their best option, and
/// short-distance car users for whom walking scores higher.
fn unconstrained_motorists(s: &Simulation) -> Vec<String> {
    let mut out = Vec::new();
    for a in s.agents.iter().filter(|a| a.current_mode == Mode::Car) {
        let car = score(&a.priorities, s.objective.row(Mode::Car));
        let best = a.available_modes().iter().all(|m| score(&a.priorities, s.objective.row(m)) <= car);
        if a.has_bus_access && !best {
            out.push(format!("agent {} on car with bus access", a.id));
        }
        if a.distance_km < 7.0 && score(&a.priorities, s.objective.row(Mode::Walk)) > car {
            out.push(format!("agent {} drives {:.1} km", a.id, a.distance_km));
        }
    }
    out
}

/// Checked on the frame right after the reset. Later frames also contain
/// one-off detours of bus users whose usual mode was disrupted; those are
/// reported but are not what the reset produces.
fn scenario_2() -> Outcome {
    let script = ScenarioScript::parse(bundled::CAR_COMFORT).unwrap();
    let mut sim = Simulation::new(&bundle(), SimulationConfig::with_seed(42)).unwrap();
    let mut at_reset = None;
    let mut detours = 0;
    run_script_with(&mut sim, &script, |s, f| {
        if f.tick == 221 {
            let car_users = s.agents.iter().filter(|a| a.current_mode == Mode::Car).count();
            at_reset = Some((car_users, unconstrained_motorists(s)));
        } else if f.tick > 221 {
            detours += unconstrained_motorists(s).len();
        }
    })
    .unwrap();
    let (car_users, violations) = at_reset.expect("reset frame reached");
    verdict(
        violations.is_empty() && sim.objective.get(Mode::Car, modechoice::Criterion::Comfort) == 1.0,
        format!(
            "{car_users} car users at tick 221, {} unconstrained {}; later disruption detours (agent-ticks): {detours}",
            violations.len(),
            violations.join(", ")
        ),
    )
}

fn scenario_3() -> Outcome {
    let (f, _) = run_bundled("perception-filter", 42);
    let bus = |t: usize| f[t].modal_share.bus;
    let stable = (bus(100) - bus(0)).abs() <= 0.02;
    let drops = bus(300) < bus(100);
    let (g, _) = run_bundled("perception-filter-no-habits", 42);
    let later: Vec<f64> = g[104..=300].iter().map(|x| x.modal_share.bus).collect();
    let later_mean = later.iter().sum::<f64>() / later.len() as f64;
    let fast = (g[103].modal_share.bus - later_mean).abs() <= 0.02 && g[103].modal_share.bus < g[100].modal_share.bus;
    verdict(
        stable && drops && fast,
        format!(
            "bus {:.3} -> {:.3} with biases; {:.3} at 300 without; no habits: {:.3} at 100, {:.3} at 103, mean after {:.3}",
            bus(0),
            bus(100),
            bus(300),
            g[100].modal_share.bus,
            g[103].modal_share.bus,
            later_mean
        ),
    )
}

fn baseline_stability() -> Outcome {
    let mut change = [0.0f64; 4];
    let seeds = 1..=20u64;
    let n = seeds.clone().count() as f64;
    for seed in seeds {
        let (f, _) = run_bundled("baseline", seed);
        for m in Mode::ALL {
            change[m.index()] += (f[200].modal_share[m] - f[0].modal_share[m]).abs() / n;
        }
    }
    let worst = change.iter().cloned().fold(0.0, f64::max);
    verdict(
        worst <= 0.05,
        format!(
            "mean |change| bike {:.4} bus {:.4} car {:.4} walk {:.4}",
            change[0], change[1], change[2], change[3]
        ),
    )
}

fn performance() -> Outcome {
    let timed = |n: usize, ticks: u64| {
        let cfg = SimulationConfig { n_agents: n, ..SimulationConfig::with_seed(7) };
        let mut sim = Simulation::new(&bundle(), cfg).unwrap();
        let t = Instant::now();
        for _ in 0..ticks {
            sim.step();
        }
        t.elapsed()
    };
    let small = timed(200, 10_000);
    let large = timed(10_000, 1_000);
    verdict(
        small < Duration::from_secs(2) && large < Duration::from_secs(10),
        format!("200x10000 in {small:?}, 10000x1000 in {large:?}"),
    )
}

fn invariant_suite() -> Outcome {
    let results = invariants::run_all(invariants::CASES);
    let failed: Vec<String> = results
        .iter()
        .filter_map(|(n, r)| r.as_ref().err().map(|e| format!("{n}: {e}")))
        .collect();
    verdict(
        failed.is_empty(),
        if failed.is_empty() {
            format!("{} properties x {} cases", results.len(), invariants::CASES)
        } else {
            failed.join("; ")
        },
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("calibration, real dataset", real_dataset),
        ("calibration, fixture recovery", fixture_recovery),
        ("decision oracle", decision_oracle),
        ("determinism and snapshot replay", determinism),
        ("reset semantics", reset_semantics),
        ("scenario 1: bike safety", scenario_1),
        ("scenario 2: car comfort", scenario_2),
        ("scenario 3: perception filter", scenario_3),
        ("baseline stability", baseline_stability),
        ("performance", performance),
        ("invariant suite", invariant_suite),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        let (tag, detail) = match check() {
            Pass(d) => ("PASS", d),
            Fail(d) => {
                failures += 1;
                ("FAIL", d)
            }
            Skip(d) => ("SKIP", d),
        };
        println!("{tag} {name}: {detail}");
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}

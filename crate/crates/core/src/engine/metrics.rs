use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::EngineError;
use crate::model::{score, Agent, Decision, FilterMatrix, Mode, ModeCriterionMatrix, PerMode};

/// Decision-type counts for one tick. `biased` and `constrained` flag
/// non-routine decisions and may overlap; `rational` counts non-routine
/// decisions carrying neither flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DecisionCounts {
    pub routine: usize,
    pub biased: usize,
    pub constrained: usize,
    pub rational: usize,
}

impl DecisionCounts {
    pub fn record(&mut self, d: &Decision) {
        if d.routine {
            self.routine += 1;
            return;
        }
        if d.biased {
            self.biased += 1;
        }
        if d.constrained {
            self.constrained += 1;
        }
        if !d.biased && !d.constrained {
            self.rational += 1;
        }
    }
}

/// Population indicators after one tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsFrame {
    pub tick: u64,
    pub modal_share: PerMode<f64>,
    /// Mean normalized score of each mode among its users; `None` when the
    /// mode has none.
    pub satisfaction: PerMode<Option<f64>>,
    pub decisions: DecisionCounts,
}

/// Normalized score in `[0, 1]`: the raw score over the best achievable one.
pub fn normalized_score(agent: &Agent, basis: &ModeCriterionMatrix, mode: Mode) -> f64 {
    let ceiling = 10.0 * agent.priorities.sum();
    if ceiling <= 0.0 {
        return 0.0;
    }
    score(&agent.priorities, basis.row(mode)) / ceiling
}

pub fn collect_metrics(
    tick: u64,
    agents: &[Agent],
    objective: &ModeCriterionMatrix,
    prototypes: &PerMode<FilterMatrix>,
    biases_on: bool,
) -> MetricsFrame {
    let mut users = PerMode::<usize>::default();
    let mut sat_sum = PerMode::<f64>::default();
    let mut decisions = DecisionCounts::default();
    for a in agents {
        let m = a.current_mode;
        users[m] += 1;
        let basis = a.decision_basis(objective, prototypes, biases_on);
        sat_sum[m] += normalized_score(a, &basis, m);
        if let Some(d) = &a.last_decision {
            decisions.record(d);
        }
    }
    let n = agents.len() as f64;
    MetricsFrame {
        tick,
        modal_share: users.map(|_, &k| k as f64 / n),
        satisfaction: PerMode::from_fn(|m| (users[m] > 0).then(|| sat_sum[m] / users[m] as f64)),
        decisions,
    }
}

pub const TIMESERIES_HEADER: [&str; 13] = [
    "tick",
    "share_bike",
    "share_bus",
    "share_car",
    "share_walk",
    "sat_bike",
    "sat_bus",
    "sat_car",
    "sat_walk",
    "n_routine",
    "n_biased",
    "n_constrained",
    "n_rational",
];

/// Writes frames as CSV, one row per tick. Reals use the shortest decimal
/// form that parses back to the same `f64`; absent satisfaction is empty.
pub fn write_timeseries<W: Write>(frames: &[MetricsFrame], dest: W) -> Result<(), EngineError> {
    let mut w = csv::Writer::from_writer(dest);
    w.write_record(TIMESERIES_HEADER)?;
    for f in frames {
        let mut row = Vec::with_capacity(13);
        row.push(f.tick.to_string());
        row.extend(Mode::ALL.iter().map(|&m| f.modal_share[m].to_string()));
        row.extend(Mode::ALL.iter().map(|&m| f.satisfaction[m].map(|s| s.to_string()).unwrap_or_default()));
        let d = f.decisions;
        row.extend([d.routine, d.biased, d.constrained, d.rational].map(|k| k.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn timeseries_to_string(frames: &[MetricsFrame]) -> String {
    let mut buf = Vec::new();
    write_timeseries(frames, &mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("csv output is utf-8")
}

pub fn read_timeseries<R: Read>(source: R) -> Result<Vec<MetricsFrame>, EngineError> {
    let mut r = csv::Reader::from_reader(source);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != TIMESERIES_HEADER {
        return Err(EngineError::Format(format!("unexpected header {header:?}")));
    }
    let bad = |what: &str, v: &str| EngineError::Format(format!("bad {what}: {v:?}"));
    let mut out = Vec::new();
    for row in r.records() {
        let row = row?;
        let real = |i: usize| row[i].parse::<f64>().map_err(|_| bad(TIMESERIES_HEADER[i], &row[i]));
        let count = |i: usize| row[i].parse::<usize>().map_err(|_| bad(TIMESERIES_HEADER[i], &row[i]));
        let tick = row[0].parse::<u64>().map_err(|_| bad("tick", &row[0]))?;
        let modal_share = PerMode::try_from_fn(|m| real(1 + m.index()))?;
        let satisfaction = PerMode::try_from_fn(|m| {
            let i = 5 + m.index();
            if row[i].is_empty() { Ok(None) } else { real(i).map(Some) }
        })?;
        out.push(MetricsFrame {
            tick,
            modal_share,
            satisfaction,
            decisions: DecisionCounts {
                routine: count(9)?,
                biased: count(10)?,
                constrained: count(11)?,
                rational: count(12)?,
            },
        });
    }
    Ok(out)
}

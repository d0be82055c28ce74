//! Synthetic survey generation with planted statistics.
//!
//! Each group's samples are built so that their median, mean and (for
//! distances) sample standard deviation equal the planted values up to
//! floating-point rounding. Calibrating the generated records therefore
//! recovers the plan, which makes the pipeline testable without real data.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bundle::CalibrationBundle;
use super::clean::CleaningThresholds;
use super::stats::DistanceStats;
use super::survey::SurveyRecord;
use super::CalibrationError;
use crate::model::{Criterion, Mode, ModeCriterionMatrix, PerMode, PriorityVector};

/// Planted statistics for one usual-mode group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupPlan {
    pub n: usize,
    pub eval_median: ModeCriterionMatrix,
    pub eval_mean: ModeCriterionMatrix,
    pub priority_mean: PriorityVector,
    pub distance: DistanceStats,
    pub car_access_count: usize,
    pub bus_access_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyPlan {
    pub seed: u64,
    pub groups: PerMode<GroupPlan>,
}

const LIKERT_SPREAD: f64 = 1.5;
const MIN_DISTANCE_KM: f64 = 0.05;

/// Builds `n` values with the given median and mean (and sample sd when
/// `sd` is given), all within `[lo, hi]`. Returned in ascending order.
pub fn planted_sample(
    n: usize,
    median: f64,
    mean: f64,
    sd: Option<f64>,
    lo: f64,
    hi: f64,
) -> Result<Vec<f64>, CalibrationError> {
    let infeasible = |why: &str| {
        Err(CalibrationError::Config(format!(
            "cannot plant n={n} median={median} mean={mean} sd={sd:?} in [{lo}, {hi}]: {why}"
        )))
    };
    if n < 3 {
        return infeasible("need at least 3 values");
    }
    let half = (n - 1) as f64 / 2.0;
    let offsets: Vec<f64> = (0..n).map(|i| (i as f64 - half) / half).collect();
    // values strictly beyond the middle position(s); shifting them leaves the median alone
    let k = if n % 2 == 1 { (n - 1) / 2 } else { n / 2 - 1 };
    let total_shift = n as f64 * (mean - median);
    let per = total_shift / k as f64;
    let shifts: Vec<f64> = (0..n)
        .map(|i| {
            let shifted = (total_shift > 0.0 && i >= n - k) || (total_shift < 0.0 && i < k);
            if shifted { per } else { 0.0 }
        })
        .collect();

    let spread = match sd {
        Some(target) => {
            let centre = mean - median;
            let b: Vec<f64> = shifts.iter().map(|e| e - centre).collect();
            let saa: f64 = offsets.iter().map(|a| a * a).sum();
            let sab: f64 = offsets.iter().zip(&b).map(|(a, b)| a * b).sum();
            let sbb: f64 = b.iter().map(|b| b * b).sum();
            let rhs = (n - 1) as f64 * target * target;
            let disc = sab * sab - saa * (sbb - rhs);
            if disc < 0.0 {
                return infeasible("sd too small for the mean/median gap");
            }
            let s = (-sab + disc.sqrt()) / saa;
            if s < 0.0 {
                return infeasible("sd too small for the mean/median gap");
            }
            s
        }
        None => {
            let mut s: f64 = LIKERT_SPREAD;
            for (o, e) in offsets.iter().zip(&shifts) {
                if *o < 0.0 {
                    s = s.min((median + e - lo) / -o);
                } else if *o > 0.0 {
                    s = s.min((hi - median - e) / o);
                }
            }
            s.max(0.0)
        }
    };

    let values: Vec<f64> = offsets
        .iter()
        .zip(&shifts)
        .map(|(o, e)| median + spread * o + e)
        .collect();
    if values.iter().any(|v| *v < lo || *v > hi) {
        return infeasible("values leave the allowed range");
    }
    Ok(values)
}

impl SurveyPlan {
    /// A 650-response plan shaped after the built-in reference bundle, with
    /// the published group sizes (204 bike, 228 bus, 134 car, 84 walk).
    pub fn reference() -> Self {
        let b = CalibrationBundle::reference();
        let sizes = PerMode { bike: 204, bus: 228, car: 134, walk: 84 };
        let sds = PerMode { bike: 3.0, bus: 6.0, car: 9.0, walk: 0.8 };
        let groups = PerMode::from_fn(|g| {
            let n: usize = sizes[g];
            let eval_median = ModeCriterionMatrix::from_fn(|m, c| {
                let v = b.objective.get(m, c) * b.prototypes[g].get(m, c).sqrt();
                ((v * 2.0).round() / 2.0).clamp(1.0, 9.0)
            });
            let eval_mean = eval_median.map(|m, c, v| {
                let k = (m.index() * 6 + c.index() + g.index()) % 5;
                v + (k as f64 - 2.0) * 0.15
            });
            let d = b.distance_stats[g];
            let access = b.access_prob[g];
            GroupPlan {
                n,
                eval_median,
                eval_mean,
                priority_mean: b.priority_means[g],
                distance: DistanceStats { sd_km: sds[g], ..d },
                car_access_count: (access.p_car_access * n as f64).round() as usize,
                bus_access_count: (access.p_bus_access * n as f64).round() as usize,
            }
        });
        SurveyPlan { seed: 650, groups }
    }

    /// Planted access fraction, computed the same way calibration does.
    pub fn access_fraction(&self, g: Mode) -> (f64, f64) {
        let p = &self.groups[g];
        let n = p.n as f64;
        let car = if g == Mode::Car { 1.0 } else { p.car_access_count as f64 / n };
        let bus = if g == Mode::Bus { 1.0 } else { p.bus_access_count as f64 / n };
        (car, bus)
    }

    pub fn generate(&self) -> Result<Vec<SurveyRecord>, CalibrationError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let cleaning = CleaningThresholds::default();
        let mut out = Vec::new();

        for g in Mode::ALL {
            let plan = &self.groups[g];
            let n = plan.n;
            let mut column = |median: f64, mean: f64, sd: Option<f64>, lo: f64, hi: f64| {
                let mut v = planted_sample(n, median, mean, sd, lo, hi)?;
                v.shuffle(&mut rng);
                Ok::<_, CalibrationError>(v)
            };

            let hi_km = match g {
                Mode::Walk => cleaning.walk_max_km,
                Mode::Bike => cleaning.bike_max_km,
                _ => cleaning.any_max_km,
            } * 0.99;
            let d = plan.distance;
            let distances = column(d.median_km, d.mean_km, Some(d.sd_km), MIN_DISTANCE_KM, hi_km)?;

            let mut prio_cols = Vec::with_capacity(6);
            for c in Criterion::ALL {
                let mu = plan.priority_mean[c];
                prio_cols.push(column(mu, mu, None, 0.0, 10.0)?);
            }
            let mut eval_cols = Vec::with_capacity(24);
            for m in Mode::ALL {
                for c in Criterion::ALL {
                    let md = plan.eval_median.get(m, c);
                    let mu = plan.eval_mean.get(m, c);
                    eval_cols.push(column(md, mu, None, 0.0, 10.0)?);
                }
            }

            let mut car_flags: Vec<bool> = (0..n).map(|i| i < plan.car_access_count).collect();
            let mut bus_flags: Vec<bool> = (0..n).map(|i| i < plan.bus_access_count).collect();
            car_flags.shuffle(&mut rng);
            bus_flags.shuffle(&mut rng);

            for i in 0..n {
                out.push(SurveyRecord {
                    usual_mode: g,
                    distance_km: distances[i],
                    trips_per_week: if (out.len() + 1) % 40 == 0 { None } else { Some(5) },
                    access_car: car_flags[i],
                    access_bus: bus_flags[i],
                    priorities: PriorityVector::from_fn(|c| prio_cols[c.index()][i]),
                    evaluations: ModeCriterionMatrix::from_fn(|m, c| {
                        eval_cols[m.index() * 6 + c.index()][i]
                    }),
                });
            }
        }
        out.shuffle(&mut rng);
        Ok(out)
    }
}

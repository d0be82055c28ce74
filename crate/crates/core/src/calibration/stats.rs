//! Per-group survey statistics that feed the calibration bundle.

use serde::{Deserialize, Serialize};

use super::survey::SurveyRecord;
use super::CalibrationError;
use crate::model::{Criterion, FilterMatrix, Mode, ModeCriterionMatrix, PerMode, PriorityVector};

/// Smallest perception factor a prototype may carry. A group mean of zero
/// would otherwise produce a zero factor.
pub const MIN_FILTER_FACTOR: f64 = 0.01;

/// Median of a slice; the mean of the two middle values for even lengths.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty sample");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

pub fn mean(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "mean of empty sample");
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for a single value.
pub fn sample_sd(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mu = mean(values);
    let ss: f64 = values.iter().map(|v| (v - mu) * (v - mu)).sum();
    (ss / (n - 1) as f64).sqrt()
}

/// Records grouped by usual mode, erroring on any empty group.
pub fn groups(records: &[SurveyRecord]) -> Result<PerMode<Vec<&SurveyRecord>>, CalibrationError> {
    let mut g: PerMode<Vec<&SurveyRecord>> = PerMode::default();
    for r in records {
        g[r.usual_mode].push(r);
    }
    for (m, rs) in g.iter() {
        if rs.is_empty() {
            return Err(CalibrationError::EmptyGroup(m));
        }
    }
    Ok(g)
}

pub fn group_counts(records: &[SurveyRecord]) -> PerMode<usize> {
    let mut counts = PerMode::<usize>::default();
    for r in records {
        counts[r.usual_mode] += 1;
    }
    counts
}

fn eval_column(records: &[&SurveyRecord], m: Mode, c: Criterion) -> Vec<f64> {
    records.iter().map(|r| r.evaluations.get(m, c)).collect()
}

/// Entrywise median evaluation within each usual-mode group.
pub fn group_medians(records: &[SurveyRecord]) -> Result<PerMode<ModeCriterionMatrix>, CalibrationError> {
    let g = groups(records)?;
    Ok(g.map(|_, rs| ModeCriterionMatrix::from_fn(|m, c| median(&eval_column(rs, m, c)))))
}

/// Entrywise median evaluation over every record.
pub fn all_response_median(records: &[SurveyRecord]) -> Result<ModeCriterionMatrix, CalibrationError> {
    if records.is_empty() {
        return Err(CalibrationError::NoRecords);
    }
    let all: Vec<&SurveyRecord> = records.iter().collect();
    Ok(ModeCriterionMatrix::from_fn(|m, c| median(&eval_column(&all, m, c))))
}

/// Blend of the four group-median matrices weighted by `shares`.
pub fn objective_matrix(
    records: &[SurveyRecord],
    shares: &PerMode<f64>,
) -> Result<ModeCriterionMatrix, CalibrationError> {
    let total: f64 = shares.iter().map(|(_, s)| *s).sum();
    if (total - 1.0).abs() > 1e-9 || shares.iter().any(|(_, s)| !(0.0..=1.0).contains(s)) {
        return Err(CalibrationError::Config(format!("shares must sum to 1, got {total}")));
    }
    let medians = group_medians(records)?;
    Ok(ModeCriterionMatrix::from_fn(|m, c| {
        let v: f64 = Mode::ALL.iter().map(|&g| shares[g] * medians[g].get(m, c)).sum();
        v.clamp(0.0, 10.0)
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorityMeans {
    pub per_mode: PerMode<PriorityVector>,
    pub overall: PriorityVector,
}

pub fn priority_means(records: &[SurveyRecord]) -> Result<PriorityMeans, CalibrationError> {
    let g = groups(records)?;
    let mean_of = |rs: &[&SurveyRecord]| {
        PriorityVector::from_fn(|c| mean(&rs.iter().map(|r| r.priorities[c]).collect::<Vec<_>>()))
    };
    let all: Vec<&SurveyRecord> = records.iter().collect();
    Ok(PriorityMeans {
        per_mode: g.map(|_, rs| mean_of(rs)),
        overall: mean_of(&all),
    })
}

/// How a group's deviation from the all-response median is aggregated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrototypeMethod {
    /// group mean / all-response median
    #[default]
    RatioOfAggregates,
    /// mean over the group's records of (record value / all-response median)
    MeanOfRatios,
}

/// Per-usual-mode perception filter prototypes. A zero median denominator
/// yields a neutral factor of 1.
pub fn filter_prototypes(
    records: &[SurveyRecord],
    all_median: &ModeCriterionMatrix,
    method: PrototypeMethod,
) -> Result<PerMode<FilterMatrix>, CalibrationError> {
    let g = groups(records)?;
    Ok(g.map(|_, rs| {
        FilterMatrix::from_fn(|m, c| {
            let denom = all_median.get(m, c);
            if denom == 0.0 {
                return 1.0;
            }
            let col = eval_column(rs, m, c);
            let factor = match method {
                PrototypeMethod::RatioOfAggregates => mean(&col) / denom,
                PrototypeMethod::MeanOfRatios => {
                    mean(&col.iter().map(|v| v / denom).collect::<Vec<_>>())
                }
            };
            factor.max(MIN_FILTER_FACTOR)
        })
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceStats {
    pub mean_km: f64,
    pub sd_km: f64,
    pub median_km: f64,
}

impl DistanceStats {
    /// Used when only a mean and median are known: the spread defaults to
    /// half the mean.
    pub fn from_mean_median(mean_km: f64, median_km: f64) -> Self {
        DistanceStats {
            mean_km,
            sd_km: mean_km / 2.0,
            median_km,
        }
    }
}

pub fn distance_stats(records: &[SurveyRecord]) -> Result<PerMode<DistanceStats>, CalibrationError> {
    let g = groups(records)?;
    Ok(g.map(|_, rs| {
        let d: Vec<f64> = rs.iter().map(|r| r.distance_km).collect();
        DistanceStats {
            mean_km: mean(&d),
            sd_km: sample_sd(&d),
            median_km: median(&d),
        }
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccessProb {
    pub p_car_access: f64,
    pub p_bus_access: f64,
}

/// Fraction of each group declaring car and bus access. Car users always
/// have car access and bus users always have bus access.
pub fn access_probabilities(records: &[SurveyRecord]) -> Result<PerMode<AccessProb>, CalibrationError> {
    let g = groups(records)?;
    Ok(g.map(|m, rs| {
        let n = rs.len() as f64;
        let car = rs.iter().filter(|r| r.access_car).count() as f64 / n;
        let bus = rs.iter().filter(|r| r.access_bus).count() as f64 / n;
        AccessProb {
            p_car_access: if m == Mode::Car { 1.0 } else { car },
            p_bus_access: if m == Mode::Bus { 1.0 } else { bus },
        }
    }))
}

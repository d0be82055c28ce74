use std::path::Path;

use serde::{Deserialize, Serialize};

use super::clean::{clean_records_with, CleaningThresholds};
use super::stats::{
    access_probabilities, all_response_median, distance_stats, filter_prototypes, group_counts,
    objective_matrix, priority_means, AccessProb, DistanceStats, PrototypeMethod,
};
use super::survey::{parse_survey, ColumnMapping, RowError, SurveyRecord};
use super::CalibrationError;
use crate::model::{validate_priorities, FilterMatrix, ModeCriterionMatrix, PerMode, PriorityVector};

pub const BUNDLE_SCHEMA_VERSION: u32 = 1;

/// Published French national commuting percentages. They add up to 98, the
/// remainder being other modes.
pub const NATIONAL_PERCENT: PerMode<f64> = PerMode {
    bike: 2.0,
    bus: 16.0,
    car: 74.0,
    walk: 6.0,
};

/// [`NATIONAL_PERCENT`] renormalized over the four modes. Used to weight the
/// objective matrix and to size the simulated population.
pub const NATIONAL_SHARES: PerMode<f64> = PerMode {
    bike: 2.0 / 98.0,
    bus: 16.0 / 98.0,
    car: 74.0 / 98.0,
    walk: 6.0 / 98.0,
};

/// Every parameter the simulator needs, derived from survey data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationBundle {
    pub schema_version: u32,
    pub objective: ModeCriterionMatrix,
    pub priority_means: PerMode<PriorityVector>,
    pub overall_priorities: PriorityVector,
    pub prototypes: PerMode<FilterMatrix>,
    pub distance_stats: PerMode<DistanceStats>,
    pub access_prob: PerMode<AccessProb>,
    pub population_shares: PerMode<f64>,
    /// Respondents per usual mode after cleaning; absent for hand-built bundles.
    #[serde(default)]
    pub sample_counts: Option<PerMode<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOptions {
    pub prototype_method: PrototypeMethod,
    pub cleaning: CleaningThresholds,
    pub national_shares: PerMode<f64>,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions {
            prototype_method: PrototypeMethod::default(),
            cleaning: CleaningThresholds::default(),
            national_shares: NATIONAL_SHARES,
        }
    }
}

impl CalibrationBundle {
    pub fn validate(&self) -> Result<(), CalibrationError> {
        let invalid = |msg: String| Err(CalibrationError::InvalidBundle(msg));
        if self.schema_version != BUNDLE_SCHEMA_VERSION {
            return invalid(format!("unsupported schema_version {}", self.schema_version));
        }
        self.objective
            .validate_values()
            .map_err(|e| CalibrationError::InvalidBundle(format!("objective: {e}")))?;
        for (m, p) in self.prototypes.iter() {
            p.validate_factors()
                .map_err(|e| CalibrationError::InvalidBundle(format!("{m} prototype: {e}")))?;
        }
        for (m, p) in self.priority_means.iter() {
            validate_priorities(p)
                .map_err(|e| CalibrationError::InvalidBundle(format!("{m} priorities: {e}")))?;
        }
        let total: f64 = self.population_shares.iter().map(|(_, s)| *s).sum();
        if (total - 1.0).abs() > 1e-9 {
            return invalid(format!("population shares sum to {total}"));
        }
        for (m, s) in self.population_shares.iter() {
            if !(0.0..=1.0).contains(s) {
                return invalid(format!("{m} share {s} outside [0, 1]"));
            }
        }
        for (m, a) in self.access_prob.iter() {
            for p in [a.p_car_access, a.p_bus_access] {
                if !(0.0..=1.0).contains(&p) {
                    return invalid(format!("{m} access probability {p} outside [0, 1]"));
                }
            }
        }
        for (m, d) in self.distance_stats.iter() {
            let ok = d.mean_km.is_finite() && d.mean_km > 0.0 && d.sd_km.is_finite() && d.sd_km >= 0.0;
            if !ok || !(d.median_km.is_finite() && d.median_km >= 0.0) {
                return invalid(format!("{m} distance stats {d:?}"));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, CalibrationError> {
        let b: Self = serde_json::from_str(text)?;
        b.validate()?;
        Ok(b)
    }

    pub fn load(path: &Path) -> Result<Self, CalibrationError> {
        let text = std::fs::read_to_string(path).map_err(|e| CalibrationError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), CalibrationError> {
        std::fs::write(path, self.to_json() + "\n").map_err(|e| CalibrationError::io(path, e))
    }

    /// The built-in default parameter set.
    ///
    /// Statistics published for the 650-response survey are used verbatim:
    /// distance means and medians, access rates, the priority means quoted
    /// for whole sample and per group, and the quoted mode evaluations (bike
    /// safety, walk time and ecology, car price and ecology, bus price).
    /// Entries with no published figure are filled with plausible values
    /// consistent with those statistics. Distance spread defaults to half
    /// the mean.
    pub fn reference() -> Self {
        use crate::model::PerCriterion;
        // columns: ecology, comfort, price, time, practicality, safety
        let objective = ModeCriterionMatrix::from_rows([
            [9.5, 5.5, 9.0, 6.5, 6.5, 4.62], // bike
            [6.5, 5.0, 6.87, 4.5, 5.0, 7.0], // bus
            [1.81, 8.0, 2.68, 7.5, 8.0, 6.5], // car
            [9.81, 6.0, 9.8, 2.98, 6.5, 7.5], // walk
        ]);
        let priority_means = PerMode {
            bike: PerCriterion::from_array([7.9, 5.8, 7.4, 7.7, 7.6, 5.37]),
            bus: PerCriterion::from_array([7.1, 6.4, 7.4, 7.35, 7.0, 6.6]),
            car: PerCriterion::from_array([5.65, 7.3, 5.63, 7.8, 8.0, 6.6]),
            walk: PerCriterion::from_array([7.3, 6.0, 6.9, 6.7, 7.2, 6.5]),
        };
        let overall_priorities = PerCriterion::from_array([7.08, 6.35, 6.97, 7.47, 7.42, 6.2]);
        let prototypes = PerMode {
            bike: FilterMatrix::from_rows([
                [1.02, 1.2, 1.05, 1.2, 1.2, 1.4],
                [0.85, 0.8, 0.85, 0.75, 0.75, 0.85],
                [0.8, 0.8, 0.8, 0.8, 0.8, 0.9],
                [1.0, 0.9, 1.0, 0.8, 0.85, 0.95],
            ]),
            bus: FilterMatrix::from_rows([
                [0.95, 0.85, 0.95, 0.85, 0.8, 0.7],
                [1.2, 1.3, 1.2, 1.5, 1.4, 1.1],
                [0.9, 0.85, 0.9, 0.85, 0.85, 0.9],
                [0.95, 0.9, 0.95, 0.8, 0.85, 0.95],
            ]),
            car: FilterMatrix::from_rows([
                [0.95, 0.7, 0.9, 0.75, 0.7, 0.65],
                [0.9, 0.8, 0.9, 0.7, 0.7, 0.9],
                [1.3, 1.15, 1.4, 1.2, 1.15, 1.1],
                [0.95, 0.8, 0.95, 0.6, 0.7, 0.9],
            ]),
            walk: FilterMatrix::from_rows([
                [0.95, 0.85, 0.95, 0.85, 0.85, 0.8],
                [0.85, 0.8, 0.9, 0.8, 0.8, 0.9],
                [0.85, 0.85, 0.85, 0.8, 0.8, 0.9],
                [1.0, 1.2, 1.0, 1.5, 1.2, 1.1],
            ]),
        };
        let distance_stats = PerMode {
            bike: DistanceStats::from_mean_median(6.43, 5.0),
            bus: DistanceStats::from_mean_median(11.16, 5.55),
            car: DistanceStats::from_mean_median(21.29, 15.0),
            walk: DistanceStats::from_mean_median(1.8, 1.5),
        };
        let access_prob = PerMode {
            bike: AccessProb { p_car_access: 1.0 - 0.299, p_bus_access: 1.0 - 0.1029 },
            bus: AccessProb { p_car_access: 1.0 - 0.5746, p_bus_access: 1.0 },
            car: AccessProb { p_car_access: 1.0, p_bus_access: 1.0 - 0.6119 },
            walk: AccessProb { p_car_access: 1.0 - 0.5, p_bus_access: 1.0 - 0.0833 },
        };
        CalibrationBundle {
            schema_version: BUNDLE_SCHEMA_VERSION,
            objective,
            priority_means,
            overall_priorities,
            prototypes,
            distance_stats,
            access_prob,
            population_shares: NATIONAL_SHARES,
            sample_counts: Some(PerMode { bike: 204, bus: 228, car: 134, walk: 84 }),
        }
    }
}

/// Derives a bundle from cleaned records with default options.
pub fn build_bundle(records: &[SurveyRecord]) -> Result<CalibrationBundle, CalibrationError> {
    build_bundle_with(records, &CalibrationOptions::default())
}

pub fn build_bundle_with(
    records: &[SurveyRecord],
    options: &CalibrationOptions,
) -> Result<CalibrationBundle, CalibrationError> {
    if records.is_empty() {
        return Err(CalibrationError::NoRecords);
    }
    let objective = objective_matrix(records, &options.national_shares)?;
    let priorities = priority_means(records)?;
    let all_median = all_response_median(records)?;
    let bundle = CalibrationBundle {
        schema_version: BUNDLE_SCHEMA_VERSION,
        objective,
        priority_means: priorities.per_mode,
        overall_priorities: priorities.overall,
        prototypes: filter_prototypes(records, &all_median, options.prototype_method)?,
        distance_stats: distance_stats(records)?,
        access_prob: access_probabilities(records)?,
        population_shares: options.national_shares,
        sample_counts: Some(group_counts(records)),
    };
    bundle.validate()?;
    Ok(bundle)
}

/// Summary of a full parse, clean and derive pass over a survey file.
#[derive(Debug, Clone)]
pub struct CalibrationReport {
    pub bundle: CalibrationBundle,
    pub parsed: usize,
    pub rejected: Vec<RowError>,
    pub dropped_by_cleaning: usize,
    pub records: Vec<SurveyRecord>,
}

pub fn calibrate<R: std::io::Read>(
    source: R,
    mapping: &ColumnMapping,
    options: &CalibrationOptions,
) -> Result<CalibrationReport, CalibrationError> {
    let parsed = parse_survey(source, mapping)?;
    let n = parsed.records.len();
    let cleaned = clean_records_with(&parsed.records, &options.cleaning);
    let bundle = build_bundle_with(&cleaned, options)?;
    Ok(CalibrationReport {
        bundle,
        parsed: n,
        rejected: parsed.rejected,
        dropped_by_cleaning: n - cleaned.len(),
        records: cleaned,
    })
}

use serde::{Deserialize, Serialize};

use super::survey::SurveyRecord;
use crate::model::Mode;

/// Distances at or above which a usual mode is considered an aberrant answer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CleaningThresholds {
    pub walk_max_km: f64,
    pub bike_max_km: f64,
    pub any_max_km: f64,
}

impl Default for CleaningThresholds {
    fn default() -> Self {
        CleaningThresholds {
            walk_max_km: 30.0,
            bike_max_km: 60.0,
            any_max_km: 300.0,
        }
    }
}

impl CleaningThresholds {
    pub fn keeps(&self, r: &SurveyRecord) -> bool {
        let d = r.distance_km;
        if d.is_nan() || d <= 0.0 || d >= self.any_max_km {
            return false;
        }
        match r.usual_mode {
            Mode::Walk => d < self.walk_max_km,
            Mode::Bike => d < self.bike_max_km,
            Mode::Bus | Mode::Car => true,
        }
    }
}

/// Drops zero distances and distances implausible for the usual mode.
pub fn clean_records(records: &[SurveyRecord]) -> Vec<SurveyRecord> {
    clean_records_with(records, &CleaningThresholds::default())
}

pub fn clean_records_with(records: &[SurveyRecord], thresholds: &CleaningThresholds) -> Vec<SurveyRecord> {
    records.iter().filter(|r| thresholds.keeps(r)).cloned().collect()
}

//! Survey CSV ingestion.
//!
//! The canonical schema has one row per respondent with the columns
//! `usual_mode`, `distance_km`, `trips_per_week`, `access_car`, `access_bus`,
//! `prio_<criterion>` (six) and `val_<mode>_<criterion>` (twenty-four).
//! Datasets with other headers are read through a [`ColumnMapping`].

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CalibrationError;
use crate::model::{Criterion, Mode, ModeCriterionMatrix, PriorityVector};

/// One cleaned-or-not survey response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyRecord {
    pub usual_mode: Mode,
    pub distance_km: f64,
    /// Optional; absent when the cell was blank or unreadable.
    pub trips_per_week: Option<u32>,
    pub access_car: bool,
    pub access_bus: bool,
    pub priorities: PriorityVector,
    pub evaluations: ModeCriterionMatrix,
}

/// A data row that could not be turned into a record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowError {
    /// 1-based line number in the source, header included.
    pub line: u64,
    pub column: String,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedSurvey {
    pub records: Vec<SurveyRecord>,
    pub rejected: Vec<RowError>,
}

pub fn prio_column(c: Criterion) -> String {
    format!("prio_{c}")
}

pub fn value_column(m: Mode, c: Criterion) -> String {
    format!("val_{m}_{c}")
}

/// Every canonical column name, in file order.
pub fn canonical_columns() -> Vec<String> {
    let mut cols: Vec<String> = ["usual_mode", "distance_km", "trips_per_week", "access_car", "access_bus"]
        .into_iter()
        .map(String::from)
        .collect();
    cols.extend(Criterion::ALL.into_iter().map(prio_column));
    for m in Mode::ALL {
        cols.extend(Criterion::ALL.into_iter().map(|c| value_column(m, c)));
    }
    cols
}

/// Maps canonical column names to the headers actually used in a file.
/// Columns not mentioned keep their canonical name.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ColumnMapping(pub HashMap<String, String>);

impl ColumnMapping {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Reads a JSON object `{ "<canonical>": "<actual header>", ... }`.
    pub fn from_json_file(path: &Path) -> Result<Self, CalibrationError> {
        let text = std::fs::read_to_string(path).map_err(|e| CalibrationError::io(path, e))?;
        let mapping: Self = serde_json::from_str(&text)?;
        let known = canonical_columns();
        if let Some(bad) = mapping.0.keys().find(|k| !known.contains(k)) {
            return Err(CalibrationError::Config(format!(
                "mapping key {bad:?} is not a canonical column"
            )));
        }
        Ok(mapping)
    }

    pub fn header_for<'a>(&'a self, canonical: &'a str) -> &'a str {
        self.0.get(canonical).map(String::as_str).unwrap_or(canonical)
    }
}

struct Columns {
    usual_mode: usize,
    distance_km: usize,
    trips_per_week: Option<usize>,
    access_car: usize,
    access_bus: usize,
    prio: [usize; 6],
    val: [[usize; 6]; 4],
}

impl Columns {
    fn resolve(headers: &csv::StringRecord, mapping: &ColumnMapping) -> Result<Self, CalibrationError> {
        let find = |canonical: &str| -> Option<usize> {
            let wanted = mapping.header_for(canonical);
            headers.iter().position(|h| h.trim() == wanted)
        };
        let require = |canonical: &str| -> Result<usize, CalibrationError> {
            find(canonical).ok_or_else(|| {
                CalibrationError::MissingColumn(mapping.header_for(canonical).to_string())
            })
        };
        let usual_mode = require("usual_mode")?;
        let distance_km = require("distance_km")?;
        let access_car = require("access_car")?;
        let access_bus = require("access_bus")?;
        let mut prio = [0; 6];
        for c in Criterion::ALL {
            prio[c.index()] = require(&prio_column(c))?;
        }
        let mut val = [[0; 6]; 4];
        for m in Mode::ALL {
            for c in Criterion::ALL {
                val[m.index()][c.index()] = require(&value_column(m, c))?;
            }
        }
        Ok(Columns {
            usual_mode,
            distance_km,
            trips_per_week: find("trips_per_week"),
            access_car,
            access_bus,
            prio,
            val,
        })
    }
}

fn parse_real(cell: &str) -> Option<f64> {
    let t = cell.trim();
    t.parse::<f64>()
        .or_else(|_| t.replace(',', ".").parse::<f64>())
        .ok()
        .filter(|v| v.is_finite())
}

fn parse_flag(cell: &str) -> Option<bool> {
    match cell.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "y" | "oui" => Some(true),
        "0" | "false" | "no" | "n" | "non" => Some(false),
        _ => None,
    }
}

fn parse_likert(cell: &str) -> Option<f64> {
    parse_real(cell).filter(|v| (0.0..=10.0).contains(v))
}

/// Parses survey CSV text. Rows with a malformed mandatory field are rejected
/// and reported; the rest become records.
pub fn parse_survey<R: Read>(source: R, mapping: &ColumnMapping) -> Result<ParsedSurvey, CalibrationError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(source);
    let headers = reader.headers()?.clone();
    if headers.is_empty() {
        return Ok(ParsedSurvey::default());
    }
    let cols = Columns::resolve(&headers, mapping)?;

    let mut out = ParsedSurvey::default();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        match parse_row(&row, &cols, &headers) {
            Ok(rec) => out.records.push(rec),
            Err((column, message)) => out.rejected.push(RowError { line, column, message }),
        }
    }
    Ok(out)
}

fn parse_row(
    row: &csv::StringRecord,
    cols: &Columns,
    headers: &csv::StringRecord,
) -> Result<SurveyRecord, (String, String)> {
    let cell = |i: usize| row.get(i).unwrap_or("");
    let fail = |i: usize, what: &str| {
        let name = headers.get(i).unwrap_or("?").to_string();
        (name, format!("{what}: {:?}", cell(i)))
    };

    let usual_mode = cell(cols.usual_mode)
        .parse::<Mode>()
        .map_err(|_| fail(cols.usual_mode, "unknown mode"))?;
    let distance_km = parse_real(cell(cols.distance_km))
        .filter(|d| *d >= 0.0)
        .ok_or_else(|| fail(cols.distance_km, "invalid distance"))?;
    let trips_per_week = cols
        .trips_per_week
        .and_then(|i| cell(i).trim().parse::<u32>().ok());
    let access_car = parse_flag(cell(cols.access_car)).ok_or_else(|| fail(cols.access_car, "invalid flag"))?;
    let access_bus = parse_flag(cell(cols.access_bus)).ok_or_else(|| fail(cols.access_bus, "invalid flag"))?;

    let mut priorities = PriorityVector::default();
    for c in Criterion::ALL {
        let i = cols.prio[c.index()];
        priorities[c] = parse_likert(cell(i)).ok_or_else(|| fail(i, "invalid Likert score"))?;
    }
    let mut evaluations = ModeCriterionMatrix::default();
    for m in Mode::ALL {
        for c in Criterion::ALL {
            let i = cols.val[m.index()][c.index()];
            let v = parse_likert(cell(i)).ok_or_else(|| fail(i, "invalid Likert score"))?;
            evaluations.set(m, c, v);
        }
    }

    Ok(SurveyRecord {
        usual_mode,
        distance_km,
        trips_per_week,
        access_car,
        access_bus,
        priorities,
        evaluations,
    })
}

/// Writes records in the canonical schema. Floats use the shortest
/// representation that reads back to the same value.
pub fn write_survey<W: std::io::Write>(records: &[SurveyRecord], dest: W) -> Result<(), CalibrationError> {
    let mut w = csv::Writer::from_writer(dest);
    w.write_record(canonical_columns())?;
    for r in records {
        let mut row: Vec<String> = vec![
            r.usual_mode.to_string(),
            r.distance_km.to_string(),
            r.trips_per_week.map(|t| t.to_string()).unwrap_or_default(),
            u8::from(r.access_car).to_string(),
            u8::from(r.access_bus).to_string(),
        ];
        row.extend(Criterion::ALL.into_iter().map(|c| r.priorities[c].to_string()));
        row.extend(r.evaluations.entries().map(|(_, _, v)| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| CalibrationError::io(Path::new("<writer>"), e))?;
    Ok(())
}

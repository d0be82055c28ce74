//! Generates the synthetic survey with planted statistics, calibrates it and
//! compares what comes back with what was planted.
//!
//!     cargo run --example calibrate_fixture [-- <write-csv-here>]

use std::time::Instant;

use modechoice::calibration::fixture::SurveyPlan;
use modechoice::calibration::{calibrate, write_survey, CalibrationOptions, ColumnMapping};
use modechoice::Mode;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let plan = SurveyPlan::reference();
    let records = plan.generate()?;
    let mut csv = Vec::new();
    write_survey(&records, &mut csv)?;
    if let Some(path) = std::env::args().nth(1) {
        std::fs::write(&path, &csv)?;
        println!("wrote {} rows to {path}", records.len());
    }

    let t = Instant::now();
    let report = calibrate(csv.as_slice(), &ColumnMapping::identity(), &CalibrationOptions::default())?;
    println!("calibrated {} rows in {:?}", report.parsed, t.elapsed());

    let b = &report.bundle;
    println!("{:<5} {:>5} {:>10} {:>10} {:>10} {:>8} {:>8}", "group", "n", "mean km", "median km", "sd km", "p car", "p bus");
    for g in Mode::ALL {
        let d = b.distance_stats[g];
        let a = b.access_prob[g];
        let n = b.sample_counts.map(|c| c[g]).unwrap_or(0);
        println!(
            "{:<5} {:>5} {:>10.4} {:>10.4} {:>10.4} {:>8.4} {:>8.4}",
            g.name(), n, d.mean_km, d.median_km, d.sd_km, a.p_car_access, a.p_bus_access
        );
        let p = &plan.groups[g];
        assert!((d.mean_km - p.distance.mean_km).abs() < 1e-6);
        assert!((d.median_km - p.distance.median_km).abs() < 1e-6);
    }
    println!("car-group ecology priority mean: {:.4}", b.priority_means.car.ecology);
    Ok(())
}

//! Saves the full simulation state mid-run, restores it and checks that the
//! continuation is bit-identical to the uninterrupted run.

use modechoice::engine::timeseries_to_string;
use modechoice::scenario::{bundled, run_script, run_script_with};
use modechoice::{CalibrationBundle, ScenarioScript, Simulation, SimulationConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let script = ScenarioScript::parse(bundled::BIKE_SAFETY)?;
    let mut sim = Simulation::new(&CalibrationBundle::reference(), SimulationConfig::default())?;
    let mut snapshot = None;
    let frames = run_script_with(&mut sim, &script, |s, _| {
        if s.tick == 250 {
            snapshot = Some(s.snapshot_json());
        }
    })?;
    let snapshot = snapshot.expect("script runs past tick 250");
    println!("snapshot at tick 250: {} bytes", snapshot.len());

    let mut resumed = Simulation::from_snapshot_json(&snapshot)?;
    let tail = run_script(&mut resumed, &script)?;
    let same = timeseries_to_string(&tail) == timeseries_to_string(&frames[250..]);
    println!("replayed ticks 251..={}: identical = {same}", resumed.tick);
    assert!(same && resumed == sim);
    Ok(())
}

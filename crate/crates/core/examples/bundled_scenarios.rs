//! Runs every bundled scenario script with seed 42 and summarizes how the
//! modal distribution moved.

use modechoice::scenario::{bundled, run_script};
use modechoice::{CalibrationBundle, Mode, ScenarioScript, Simulation, SimulationConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bundle = CalibrationBundle::reference();
    for s in &bundled::ALL {
        let script = ScenarioScript::parse(s.text)?;
        let mut sim = Simulation::new(&bundle, SimulationConfig::default())?;
        let start = sim.metrics();
        let frames = run_script(&mut sim, &script)?;
        println!("{} ({}): {} ticks", s.name, s.summary, frames.len());
        let checkpoints = [frames.len() / 4, frames.len() / 2, frames.len() * 3 / 4, frames.len()];
        for m in Mode::ALL {
            let path: Vec<String> = checkpoints
                .iter()
                .map(|&t| format!("{:.3}", frames[t - 1].modal_share[m]))
                .collect();
            println!("  {:<5} {:.3} -> {}", m.name(), start.modal_share[m], path.join(" -> "));
        }
    }
    Ok(())
}

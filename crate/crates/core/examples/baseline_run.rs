//! Runs the default population with no intervention and prints the modal
//! distribution every 20 ticks. Pass a path to also write the time series.
//!
//!     cargo run --example baseline_run [-- out.csv]

use modechoice::engine::write_timeseries;
use modechoice::{CalibrationBundle, Mode, Simulation, SimulationConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut sim = Simulation::new(&CalibrationBundle::reference(), SimulationConfig::default())?;
    let mut frames = vec![sim.metrics()];
    frames.extend(sim.run(200));

    println!("{:>5} {:>6} {:>6} {:>6} {:>6} {:>8}", "tick", "bike", "bus", "car", "walk", "routine");
    for f in frames.iter().step_by(20) {
        let s = f.modal_share;
        println!(
            "{:>5} {:>6.3} {:>6.3} {:>6.3} {:>6.3} {:>8}",
            f.tick, s[Mode::Bike], s[Mode::Bus], s[Mode::Car], s[Mode::Walk], f.decisions.routine
        );
    }
    if let Some(path) = std::env::args().nth(1) {
        write_timeseries(&frames[1..], std::fs::File::create(&path)?)?;
        println!("wrote {path}");
    }
    Ok(())
}

//! Improves bike safety while habits hold everyone in place, then deletes
//! all trip histories and watches the population re-evaluate at once.

use modechoice::{CalibrationBundle, Criterion, Mode, Mutation, Simulation, SimulationConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut sim = Simulation::new(&CalibrationBundle::reference(), SimulationConfig::default())?;
    sim.apply(Mutation::SetEnv { mode: Mode::Bike, criterion: Criterion::Safety, value: 9.0 })?;
    for f in sim.run(30).iter().step_by(10) {
        println!("tick {:>3} bike {:.3} routine {:>3}", f.tick, f.modal_share.bike, f.decisions.routine);
    }
    let applied = sim.apply(Mutation::ResetHabits)?;
    println!("reset applied before tick {}", applied.tick + 1);
    for f in sim.run(5) {
        let d = f.decisions;
        println!(
            "tick {:>3} bike {:.3} routine {:>3} biased {:>3} constrained {:>3} rational {:>3}",
            f.tick, f.modal_share.bike, d.routine, d.biased, d.constrained, d.rational
        );
    }
    Ok(())
}

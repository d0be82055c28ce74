//! Changes the environment and the population's priorities while the
//! simulation runs, the way an interactive client would.

use modechoice::{CalibrationBundle, Criterion, Mode, Mutation, Simulation, SimulationConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut sim = Simulation::new(&CalibrationBundle::reference(), SimulationConfig::default())?;
    let schedule = [
        (20, Mutation::SetFlags { biases: false, habits: true }),
        (40, Mutation::SetEnv { mode: Mode::Bus, criterion: Criterion::Time, value: 8.0 }),
        (60, Mutation::SetPriority { criterion: Criterion::Ecology, target_mean: 9.5 }),
        (80, Mutation::ResetHabits),
    ];
    for (at, m) in schedule {
        let frames = sim.run(at - sim.tick);
        let f = frames.last().expect("at least one tick");
        println!(
            "tick {:>3}: bike {:.3} bus {:.3} car {:.3} walk {:.3}",
            f.tick, f.modal_share.bike, f.modal_share.bus, f.modal_share.car, f.modal_share.walk
        );
        let applied = sim.apply(m)?;
        println!("  applied {:?} (achieved mean {:?})", applied.mutation, applied.achieved_mean);
    }
    let f = sim.run(20).pop().expect("frames");
    println!("tick {:>3}: bike {:.3} bus {:.3} car {:.3} walk {:.3}", f.tick, f.modal_share.bike, f.modal_share.bus, f.modal_share.car, f.modal_share.walk);
    Ok(())
}

//! Runs the baseline over 20 seeds in parallel and reports how far each
//! modal share drifts in 200 ticks.

use std::thread;

use modechoice::{CalibrationBundle, Mode, Simulation, SimulationConfig};

fn main() {
    let bundle = CalibrationBundle::reference();
    let drifts: Vec<(u64, [f64; 4])> = thread::scope(|scope| {
        let handles: Vec<_> = (1..=20u64)
            .map(|seed| {
                let bundle = &bundle;
                scope.spawn(move || {
                    let mut sim = Simulation::new(bundle, SimulationConfig::with_seed(seed)).expect("valid");
                    let start = sim.metrics().modal_share;
                    let end = sim.run(200).pop().expect("frames").modal_share;
                    (seed, Mode::ALL.map(|m| end[m] - start[m]))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker")).collect()
    });

    println!("{:>4} {:>7} {:>7} {:>7} {:>7}", "seed", "bike", "bus", "car", "walk");
    let mut mean_abs = [0.0; 4];
    for (seed, d) in &drifts {
        println!("{seed:>4} {:>+7.3} {:>+7.3} {:>+7.3} {:>+7.3}", d[0], d[1], d[2], d[3]);
        for i in 0..4 {
            mean_abs[i] += d[i].abs() / drifts.len() as f64;
        }
    }
    println!("mean |drift| {:.4} {:.4} {:.4} {:.4}", mean_abs[0], mean_abs[1], mean_abs[2], mean_abs[3]);
}

//! One commuter, one decision, shown step by step: availability, perceived
//! values through a habit-weighted filter, scores and the resulting flags.

use modechoice::model::{
    choose_mode, effective_filter, habit_strength, perceive, score, Agent, DecisionParams, Draws, TripHistory,
};
use modechoice::{CalibrationBundle, Mode};

fn main() {
    let bundle = CalibrationBundle::reference();
    let mut history = TripHistory::filled(20, Mode::Car);
    for _ in 0..6 {
        history.push(Mode::Bus);
    }
    let agent = Agent {
        id: 0,
        priorities: bundle.priority_means.car,
        history,
        distance_km: 5.5,
        has_car_access: true,
        has_bus_access: true,
        current_mode: Mode::Car,
        initial_usual_mode: Mode::Car,
        last_decision: None,
    };

    let usual = agent.usual_mode();
    let h = habit_strength(&agent.history, usual);
    println!("usual mode {usual}, habit strength {h:.2}, available {:?}", agent.available_modes().iter().collect::<Vec<_>>());

    let filter = effective_filter(&bundle.prototypes[usual], h).expect("h in [0, 1]");
    let seen = perceive(&bundle.objective, &filter);
    println!("{:<5} {:>10} {:>10}", "mode", "objective", "perceived");
    for m in Mode::ALL {
        println!(
            "{:<5} {:>10.2} {:>10.2}",
            m.name(),
            score(&agent.priorities, bundle.objective.row(m)),
            score(&agent.priorities, seen.row(m))
        );
    }

    for (label, draws) in [
        ("habit draw below h", Draws { disrupt: 0.5, habit: 0.1 }),
        ("habit draw above h", Draws { disrupt: 0.5, habit: 0.9 }),
        ("disrupted", Draws { disrupt: 0.001, habit: 0.1 }),
    ] {
        for biases_on in [true, false] {
            let params = DecisionParams { biases_on, ..DecisionParams::default() };
            let d = choose_mode(&agent, &bundle.objective, &bundle.prototypes, params, draws);
            println!("{label:<20} biases {biases_on:<5} -> {d:?}");
        }
    }
}

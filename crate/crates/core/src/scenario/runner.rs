use super::script::{Command, ScenarioScript};
use super::ScenarioError;
use crate::calibration::CalibrationBundle;
use crate::engine::{Applied, MetricsFrame, Mutation, Simulation, SimulationConfig};

fn ramp_value(from: u64, to: u64, start: f64, end: f64, tick: u64) -> f64 {
    if tick == to {
        return end;
    }
    start + (end - start) * (tick - from) as f64 / (to - from) as f64
}

/// Applies every command active at the simulation's current tick, in file
/// order. Ramps set their interpolated value on each tick of their range.
pub fn apply_due(sim: &mut Simulation, script: &ScenarioScript) -> Result<Vec<Applied>, ScenarioError> {
    let now = sim.tick;
    let mut applied = Vec::new();
    for cmd in &script.commands {
        match *cmd {
            Command::At { tick, mutation } if tick == now => applied.push(sim.apply(mutation)?),
            Command::Ramp { from, to, mode, criterion, start, end } if (from..=to).contains(&now) => {
                let value = ramp_value(from, to, start, end, now);
                applied.push(sim.apply(Mutation::SetEnv { mode, criterion, value })?);
            }
            _ => {}
        }
    }
    Ok(applied)
}

/// Drives `sim` from its current tick to the script's end, calling
/// `observe` after every tick. Commands scheduled before the current tick
/// are not replayed, so a simulation restored from a snapshot continues
/// exactly where the original left off.
pub fn run_script_with(
    sim: &mut Simulation,
    script: &ScenarioScript,
    mut observe: impl FnMut(&Simulation, &MetricsFrame),
) -> Result<Vec<MetricsFrame>, ScenarioError> {
    let end = script.end_tick();
    let mut frames = Vec::with_capacity(end.saturating_sub(sim.tick) as usize);
    while sim.tick < end {
        apply_due(sim, script)?;
        let frame = sim.step();
        observe(sim, &frame);
        frames.push(frame);
    }
    Ok(frames)
}

pub fn run_script(sim: &mut Simulation, script: &ScenarioScript) -> Result<Vec<MetricsFrame>, ScenarioError> {
    run_script_with(sim, script, |_, _| {})
}

/// Initializes a population and runs the script; one frame per tick.
pub fn run_scenario(
    bundle: &CalibrationBundle,
    config: SimulationConfig,
    script: &ScenarioScript,
) -> Result<Vec<MetricsFrame>, ScenarioError> {
    let mut sim = Simulation::new(bundle, config)?;
    run_script(&mut sim, script)
}

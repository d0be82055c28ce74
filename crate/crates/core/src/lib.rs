//! Agent-based simulation of commuter mode choice.
//!
//! Agents score four modes (bike, bus, car, walk) on six criteria with their
//! own priorities. What they score is the shared objective environment seen
//! through a perception filter whose strength grows with habit, and habits
//! also let them reuse their usual mode without evaluating at all.
//!
//! * [`model`]: domain types and the single-agent decision procedure.
//! * [`calibration`]: survey CSV ingestion and parameter derivation.
//! * [`engine`]: population initialization, the seeded tick loop, runtime
//!   mutations, metrics and snapshots.
//! * [`scenario`]: the scenario language and the bundled experiment scripts.
//!
//! The `examples/` directory has one runnable program per capability.

pub mod calibration;
pub mod engine;
pub mod model;
pub mod scenario;

pub use calibration::CalibrationBundle;
pub use engine::{MetricsFrame, Mutation, Simulation, SimulationConfig};
pub use model::{Criterion, Mode};
pub use scenario::{run_scenario, ScenarioScript};

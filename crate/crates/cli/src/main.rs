//! `modechoice` command-line tool.
//!
//! Exit status: 0 success, 1 usage error, 2 invalid input, 3 runtime failure.

use std::fs;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use modechoice::calibration::{calibrate, CalibrationError, CalibrationOptions, ColumnMapping, PrototypeMethod};
use modechoice::engine::{write_timeseries, EngineError, MetricsFrame};
use modechoice::scenario::{bundled, run_script, ScenarioError};
use modechoice::{CalibrationBundle, Mode, ScenarioScript, Simulation, SimulationConfig};
use modechoice_service::{ServiceConfig, ENV_BUNDLE_DIR, ENV_IDLE_TIMEOUT, ENV_LISTEN};

#[derive(Parser)]
#[command(name = "modechoice", version, about = "Agent-based commuter mode choice simulator")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Derive a calibration bundle from a survey CSV.
    Calibrate {
        #[arg(long)]
        survey: PathBuf,
        /// JSON object mapping canonical column names to the file's headers.
        #[arg(long)]
        mapping: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "ratio-of-aggregates")]
        prototype_method: Method,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one simulation and write its per-tick metrics as CSV.
    Run {
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long)]
        seed: Option<u64>,
        /// Metrics CSV destination; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Resume from this snapshot instead of initializing a population.
        #[arg(long, conflicts_with_all = ["bundle", "agents", "seed"])]
        snapshot: Option<PathBuf>,
        /// Write the final state here.
        #[arg(long)]
        save_snapshot: Option<PathBuf>,
    },
    /// Run the same scenario for a range of seeds in parallel.
    Sweep {
        #[command(flatten)]
        sim: SimArgs,
        /// Inclusive range such as `1..20`.
        #[arg(long, value_parser = parse_seed_range)]
        seeds: RangeInclusive<u64>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Inspect the bundled scenario scripts.
    Scenarios {
        #[command(subcommand)]
        action: ScenarioAction,
    },
    /// Serve the HTTP session API.
    Serve {
        #[arg(long, env = ENV_LISTEN, default_value = "127.0.0.1:8080")]
        listen: std::net::SocketAddr,
        #[arg(long, env = ENV_BUNDLE_DIR)]
        bundle_dir: Option<PathBuf>,
        /// Seconds without client activity before a session is dropped.
        #[arg(long, env = ENV_IDLE_TIMEOUT, default_value_t = 1800)]
        idle_timeout: u64,
    },
}

#[derive(clap::Args)]
struct SimArgs {
    /// `reference` or a bundle JSON file.
    #[arg(long, default_value = "reference")]
    bundle: String,
    /// Bundled scenario name or script file.
    #[arg(long, default_value = "baseline")]
    scenario: String,
    #[arg(long)]
    agents: Option<usize>,
    /// Stop after this tick instead of the script's end.
    #[arg(long)]
    ticks: Option<u64>,
}

#[derive(Subcommand)]
enum ScenarioAction {
    List,
    Show { name: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    RatioOfAggregates,
    MeanOfRatios,
}

enum Failure {
    Usage(String),
    Invalid(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Invalid(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }
}

impl From<CalibrationError> for Failure {
    fn from(e: CalibrationError) -> Self {
        match e {
            CalibrationError::Io { .. } => Failure::Runtime(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Failure::Runtime(format!("{}: {e}", path.display()))
}

fn parse_seed_range(s: &str) -> Result<RangeInclusive<u64>, String> {
    let (a, b) = s.split_once("..").ok_or("expected <first>..<last>")?;
    let a: u64 = a.trim().parse().map_err(|_| format!("bad seed {a:?}"))?;
    let b: u64 = b.trim_start_matches('=').trim().parse().map_err(|_| format!("bad seed {b:?}"))?;
    if b < a {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok(a..=b)
}

fn load_bundle(arg: &str) -> Result<CalibrationBundle, Failure> {
    if arg == "reference" {
        return Ok(CalibrationBundle::reference());
    }
    Ok(CalibrationBundle::load(Path::new(arg))?)
}

fn load_script(arg: &str, ticks: Option<u64>) -> Result<ScenarioScript, Failure> {
    let mut script = match bundled::find(arg) {
        Some(s) => ScenarioScript::parse(s.text)?,
        None => {
            let path = Path::new(arg);
            if !path.exists() {
                return Err(Failure::Usage(format!("{arg:?} is neither a bundled scenario nor a file")));
            }
            ScenarioScript::parse(&fs::read_to_string(path).map_err(io_err(path))?)?
        }
    };
    if let Some(t) = ticks {
        script.commands.retain(|c| c.tick() < t);
        script.commands.push(modechoice::scenario::Command::RunUntil { tick: t });
    }
    Ok(script)
}

fn config_for(sim: &SimArgs, seed: Option<u64>) -> SimulationConfig {
    let mut config = SimulationConfig::default();
    if let Some(s) = seed {
        config.seed = s;
    }
    if let Some(n) = sim.agents {
        config.n_agents = n;
    }
    config
}

fn write_csv(frames: &[MetricsFrame], out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => {
            let f = fs::File::create(p).map_err(io_err(p))?;
            write_timeseries(frames, std::io::BufWriter::new(f)).map_err(|e| Failure::Runtime(e.to_string()))
        }
        None => write_timeseries(frames, std::io::stdout().lock()).map_err(|e| Failure::Runtime(e.to_string())),
    }
}

fn shares_line(f: &MetricsFrame) -> String {
    Mode::ALL
        .iter()
        .map(|&m| format!("{m} {:.3}", f.modal_share[m]))
        .collect::<Vec<_>>()
        .join("  ")
}

fn execute(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Calibrate { survey, mapping, prototype_method, out } => {
            let mapping = match &mapping {
                Some(p) => ColumnMapping::from_json_file(p)?,
                None => ColumnMapping::identity(),
            };
            let options = CalibrationOptions {
                prototype_method: match prototype_method {
                    Method::RatioOfAggregates => PrototypeMethod::RatioOfAggregates,
                    Method::MeanOfRatios => PrototypeMethod::MeanOfRatios,
                },
                ..Default::default()
            };
            let file = fs::File::open(&survey).map_err(io_err(&survey))?;
            let report = calibrate(std::io::BufReader::new(file), &mapping, &options)?;
            for r in &report.rejected {
                eprintln!("rejected line {} ({}): {}", r.line, r.column, r.message);
            }
            report.bundle.save(&out)?;
            let kept = report.records.len();
            eprintln!(
                "{} rows parsed, {} rejected, {} dropped by cleaning, {kept} used; bundle written to {}",
                report.parsed,
                report.rejected.len(),
                report.dropped_by_cleaning,
                out.display()
            );
        }
        Cmd::Run { sim, seed, out, snapshot, save_snapshot } => {
            let script = load_script(&sim.scenario, sim.ticks)?;
            let mut state = match &snapshot {
                Some(p) => Simulation::from_snapshot_json(&fs::read_to_string(p).map_err(io_err(p))?)?,
                None => Simulation::new(&load_bundle(&sim.bundle)?, config_for(&sim, seed))?,
            };
            let frames = run_script(&mut state, &script)?;
            write_csv(&frames, out.as_deref())?;
            if let Some(p) = &save_snapshot {
                fs::write(p, state.snapshot_json()).map_err(io_err(p))?;
            }
            if let Some(last) = frames.last() {
                eprintln!("tick {}: {}", last.tick, shares_line(last));
            }
        }
        Cmd::Sweep { sim, seeds, out_dir } => {
            let bundle = load_bundle(&sim.bundle)?;
            let script = load_script(&sim.scenario, sim.ticks)?;
            fs::create_dir_all(&out_dir).map_err(io_err(&out_dir))?;
            let seeds: Vec<u64> = seeds.collect();
            let workers = std::thread::available_parallelism().map_or(4, |n| n.get()).min(seeds.len());
            let chunk = seeds.len().div_ceil(workers);
            let results: Vec<(u64, Result<Vec<MetricsFrame>, Failure>)> = std::thread::scope(|s| {
                let handles: Vec<_> = seeds
                    .chunks(chunk)
                    .map(|part| {
                        let (bundle, script, sim) = (&bundle, &script, &sim);
                        s.spawn(move || {
                            part.iter()
                                .map(|&seed| {
                                    let r = Simulation::new(bundle, config_for(sim, Some(seed)))
                                        .map_err(Failure::from)
                                        .and_then(|mut st| run_script(&mut st, script).map_err(Failure::from));
                                    (seed, r)
                                })
                                .collect::<Vec<_>>()
                        })
                    })
                    .collect();
                handles.into_iter().flat_map(|h| h.join().expect("sweep worker panicked")).collect()
            });
            for (seed, r) in results {
                let frames = r?;
                let path = out_dir.join(format!("seed-{seed}.csv"));
                write_csv(&frames, Some(&path))?;
                if let Some(last) = frames.last() {
                    eprintln!("seed {seed:>4}: {}", shares_line(last));
                }
            }
        }
        Cmd::Scenarios { action: ScenarioAction::List } => {
            let mut out = std::io::stdout().lock();
            for s in &bundled::ALL {
                let _ = writeln!(out, "{:<28} {}", s.name, s.summary);
            }
        }
        Cmd::Scenarios { action: ScenarioAction::Show { name } } => {
            let s = bundled::find(&name).ok_or_else(|| Failure::Usage(format!("no bundled scenario {name:?}")))?;
            print!("{}", s.text);
        }
        Cmd::Serve { listen, bundle_dir, idle_timeout } => {
            let config = ServiceConfig { listen, bundle_dir, idle_timeout: Duration::from_secs(idle_timeout) };
            let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::Runtime(e.to_string()))?;
            rt.block_on(modechoice_service::serve(config)).map_err(|e| Failure::Runtime(e.to_string()))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Usage(m) | Failure::Invalid(m) | Failure::Runtime(m)) = &f;
            eprintln!("error: {m}");
            ExitCode::from(f.code())
        }
    }
}

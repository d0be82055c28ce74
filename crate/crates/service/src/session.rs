//! Sessions: one simulation each, its frame log and its mutation log.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use modechoice::engine::{Applied, MetricsFrame, Mutation};
use modechoice::scenario::{Command, ScenarioScript};
use modechoice::{CalibrationBundle, Simulation, SimulationConfig};
use serde::Serialize;
use tokio::task::JoinHandle;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AutoRun {
    pub running: bool,
    pub ticks_per_second: f64,
}

/// Mutable state of one session. Every tick and every mutation goes through
/// the session mutex, so the frame log always reflects one serial order.
pub struct SessionState {
    pub sim: Simulation,
    /// Frames for ticks 1..=sim.tick; frame `t` sits at index `t - 1`.
    pub frames: Vec<MetricsFrame>,
    pub initial_frame: MetricsFrame,
    pub log: Vec<Applied>,
    pub bundle: CalibrationBundle,
    pub bundle_name: String,
    pub config: SimulationConfig,
    pub last_active: Instant,
    pub auto_run: AutoRun,
}

impl SessionState {
    pub fn step(&mut self, n: u64) -> Vec<MetricsFrame> {
        let start = self.frames.len();
        for _ in 0..n {
            let f = self.sim.step();
            self.frames.push(f);
        }
        self.frames[start..].to_vec()
    }

    pub fn apply(&mut self, m: Mutation) -> Result<Applied, modechoice::engine::EngineError> {
        let applied = self.sim.apply(m)?;
        self.log.push(applied);
        Ok(applied)
    }

    /// Logged frames with `from <= tick <= to`.
    pub fn frames_between(&self, from: u64, to: u64) -> Vec<MetricsFrame> {
        let mut out = Vec::new();
        if from == 0 && to >= from {
            out.push(self.initial_frame.clone());
        }
        let lo = from.max(1);
        let hi = to.min(self.sim.tick);
        if lo <= hi {
            out.extend_from_slice(&self.frames[(lo - 1) as usize..hi as usize]);
        }
        out
    }

    /// The mutation log as a scenario script; running it from the session's
    /// bundle and config reproduces the frame log.
    pub fn replay_script(&self) -> ScenarioScript {
        let mut commands: Vec<Command> = self
            .log
            .iter()
            .map(|a| Command::At { tick: a.tick, mutation: a.mutation })
            .collect();
        commands.push(Command::RunUntil { tick: self.sim.tick });
        ScenarioScript { commands }
    }
}

pub struct Session {
    pub id: String,
    pub created_at_unix: u64,
    state: Mutex<SessionState>,
    auto_task: Mutex<Option<JoinHandle<()>>>,
}

impl Session {
    pub fn new(id: String, state: SessionState) -> Self {
        let created_at_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Session {
            id,
            created_at_unix,
            state: Mutex::new(state),
            auto_task: Mutex::new(None),
        }
    }

    pub fn lock(&self) -> MutexGuard<'_, SessionState> {
        // a panic mid-tick would leave a torn state; surface it as poisoned
        self.state.lock().expect("session state poisoned")
    }

    /// Locks and records client activity.
    pub fn touch(&self) -> MutexGuard<'_, SessionState> {
        let mut g = self.lock();
        g.last_active = Instant::now();
        g
    }

    /// Starts, retunes or stops the background ticker.
    pub fn set_auto_run(self: &Arc<Self>, auto: AutoRun) {
        let mut task = self.auto_task.lock().expect("auto-run slot poisoned");
        if let Some(t) = task.take() {
            t.abort();
        }
        self.touch().auto_run = auto;
        if !auto.running {
            return;
        }
        let me = Arc::downgrade(self);
        let period = Duration::from_secs_f64(1.0 / auto.ticks_per_second);
        *task = Some(tokio::spawn(async move {
            let mut ticker = tokio::time::interval_at(tokio::time::Instant::now() + period, period);
            ticker.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
            loop {
                ticker.tick().await;
                let Some(session) = me.upgrade() else { break };
                session.lock().step(1);
            }
        }));
    }

    pub fn stop(&self) {
        if let Some(t) = self.auto_task.lock().expect("auto-run slot poisoned").take() {
            t.abort();
        }
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        self.stop();
    }
}

#[derive(Default)]
pub struct Registry {
    sessions: Mutex<HashMap<String, Arc<Session>>>,
    tokens: Mutex<HashMap<String, String>>,
}

impl Registry {
    pub fn insert(&self, session: Arc<Session>, client_token: Option<String>) {
        if let Some(t) = client_token {
            self.tokens.lock().expect("tokens poisoned").insert(t, session.id.clone());
        }
        self.sessions.lock().expect("sessions poisoned").insert(session.id.clone(), session);
    }

    pub fn by_token(&self, token: &str) -> Option<Arc<Session>> {
        let id = self.tokens.lock().expect("tokens poisoned").get(token).cloned()?;
        self.get(&id)
    }

    pub fn get(&self, id: &str) -> Option<Arc<Session>> {
        self.sessions.lock().expect("sessions poisoned").get(id).cloned()
    }

    pub fn remove(&self, id: &str) -> Option<Arc<Session>> {
        let s = self.sessions.lock().expect("sessions poisoned").remove(id)?;
        self.tokens.lock().expect("tokens poisoned").retain(|_, v| v != id);
        s.stop();
        Some(s)
    }

    /// Drops sessions idle for longer than `timeout`. Returns how many.
    pub fn expire(&self, timeout: Duration) -> usize {
        let now = Instant::now();
        let stale: Vec<String> = self
            .sessions
            .lock()
            .expect("sessions poisoned")
            .values()
            .filter(|s| now.duration_since(s.lock().last_active) > timeout)
            .map(|s| s.id.clone())
            .collect();
        for id in &stale {
            self.remove(id);
        }
        stale.len()
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().expect("sessions poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

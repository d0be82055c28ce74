//! Request handlers.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::IntoResponse;
use axum::Json;
use modechoice::engine::{Applied, MetricsFrame, Mutation, Snapshot};
use modechoice::model::{ModeCriterionMatrix, PriorityVector};
use modechoice::{CalibrationBundle, Criterion, Mode, Simulation, SimulationConfig};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::ApiError;
use crate::session::{AutoRun, Session, SessionState};
use crate::AppState;

/// Most ticks a single step request may ask for.
pub const MAX_STEP: u64 = 100_000;
pub const MAX_TICKS_PER_SECOND: f64 = 100.0;

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    let mut de = serde_json::Deserializer::from_slice(body);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        match inner.classify() {
            serde_json::error::Category::Data if path != "." => ApiError::validation(path, inner.to_string()),
            serde_json::error::Category::Data => ApiError::validation("body", inner.to_string()),
            _ => ApiError::bad_request(format!("invalid JSON body: {inner}")),
        }
    })
}

fn parse_body_or_default<T: DeserializeOwned + Default>(body: &Bytes) -> Result<T, ApiError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        Ok(T::default())
    } else {
        parse_body(body)
    }
}

fn session(state: &AppState, id: &str) -> Result<Arc<Session>, ApiError> {
    let s = state.registry.get(id).ok_or_else(|| ApiError::not_found(format!("no session {id}")))?;
    if s.lock().last_active.elapsed() > state.config.idle_timeout {
        state.registry.remove(id);
        return Err(ApiError::not_found(format!("session {id} expired")));
    }
    Ok(s)
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateRequest {
    /// Name of a bundle listed by `GET /bundles`; defaults to `reference`.
    pub bundle: Option<String>,
    /// A full bundle supplied inline; takes precedence over `bundle`.
    pub bundle_inline: Option<CalibrationBundle>,
    #[serde(default)]
    pub config: SimulationConfig,
    pub client_token: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct CreateResponse {
    pub session_id: String,
    pub tick: u64,
    pub n_agents: usize,
    pub bundle: String,
    pub initial_frame: MetricsFrame,
    pub snapshot: Snapshot,
}

pub async fn create_session(State(state): State<AppState>, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    let req: CreateRequest = parse_body_or_default(&body)?;
    if let Some(token) = &req.client_token {
        if let Some(existing) = state.registry.by_token(token) {
            let g = existing.touch();
            let resp = CreateResponse {
                session_id: existing.id.clone(),
                tick: g.sim.tick,
                n_agents: g.sim.agents.len(),
                bundle: g.bundle_name.clone(),
                initial_frame: g.initial_frame.clone(),
                snapshot: g.sim.to_snapshot(),
            };
            return Ok((StatusCode::OK, Json(resp)));
        }
    }

    let (bundle_name, bundle) = match req.bundle_inline {
        Some(b) => {
            b.validate().map_err(|e| ApiError::validation("bundle_inline", e.to_string()))?;
            ("inline".to_string(), b)
        }
        None => {
            let name = req.bundle.unwrap_or_else(|| crate::REFERENCE_BUNDLE.to_string());
            let b = state.bundles.load(&name)?;
            (name, b)
        }
    };
    let config = req.config;
    let sim = tokio::task::spawn_blocking({
        let bundle = bundle.clone();
        move || Simulation::new(&bundle, config)
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))??;

    let initial_frame = sim.metrics();
    let snapshot = sim.to_snapshot();
    let id = uuid::Uuid::new_v4().to_string();
    let resp = CreateResponse {
        session_id: id.clone(),
        tick: 0,
        n_agents: sim.agents.len(),
        bundle: bundle_name.clone(),
        initial_frame: initial_frame.clone(),
        snapshot,
    };
    let st = SessionState {
        sim,
        frames: Vec::new(),
        initial_frame,
        log: Vec::new(),
        bundle,
        bundle_name,
        config,
        last_active: Instant::now(),
        auto_run: AutoRun { running: false, ticks_per_second: 0.0 },
    };
    state.registry.insert(Arc::new(Session::new(id, st)), req.client_token);
    Ok((StatusCode::CREATED, Json(resp)))
}

#[derive(Debug, Serialize)]
pub struct SessionInfo {
    pub session_id: String,
    pub created_at: u64,
    pub tick: u64,
    pub n_agents: usize,
    pub bundle: String,
    pub config: SimulationConfig,
    pub biases_on: bool,
    pub habits_on: bool,
    pub auto_run: AutoRun,
    pub mutations: usize,
    /// Current objective values, for clients mirroring the environment.
    pub objective: ModeCriterionMatrix,
    /// Current population mean of each priority.
    pub priority_means: PriorityVector,
}

pub async fn get_session(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<SessionInfo>, ApiError> {
    let s = session(&state, &id)?;
    let g = s.touch();
    Ok(Json(SessionInfo {
        session_id: s.id.clone(),
        created_at: s.created_at_unix,
        tick: g.sim.tick,
        n_agents: g.sim.agents.len(),
        bundle: g.bundle_name.clone(),
        config: g.config,
        biases_on: g.sim.params.biases_on,
        habits_on: g.sim.params.habits_on,
        auto_run: g.auto_run,
        mutations: g.log.len(),
        objective: g.sim.objective,
        priority_means: PriorityVector::from_fn(|c| g.sim.priority_mean(c)),
    }))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepRequest {
    #[serde(default = "one")]
    pub n: u64,
}

impl Default for StepRequest {
    fn default() -> Self {
        StepRequest { n: 1 }
    }
}

fn one() -> u64 {
    1
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FramesResponse {
    pub frames: Vec<MetricsFrame>,
}

pub async fn step(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> Result<Json<FramesResponse>, ApiError> {
    let req: StepRequest = parse_body_or_default(&body)?;
    if req.n == 0 || req.n > MAX_STEP {
        return Err(ApiError::validation("n", format!("n must be in 1..={MAX_STEP}, got {}", req.n)));
    }
    let s = session(&state, &id)?;
    let frames = tokio::task::spawn_blocking(move || s.touch().step(req.n))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?;
    Ok(Json(FramesResponse { frames }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MutationResponse {
    pub applied: Applied,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum MutationKind {
    SetEnv,
    SetPriority,
    ResetHabits,
    SetFlags,
}

/// Flat form of [`Mutation`] so that decoding errors carry a field path,
/// which serde cannot report through an internally tagged enum.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MutationBody {
    kind: MutationKind,
    mode: Option<Mode>,
    criterion: Option<Criterion>,
    value: Option<f64>,
    target_mean: Option<f64>,
    biases: Option<bool>,
    habits: Option<bool>,
}

impl MutationBody {
    fn into_mutation(self) -> Result<Mutation, ApiError> {
        fn need<T>(v: Option<T>, field: &str) -> Result<T, ApiError> {
            v.ok_or_else(|| ApiError::validation(field, format!("missing field `{field}`")))
        }
        Ok(match self.kind {
            MutationKind::SetEnv => Mutation::SetEnv {
                mode: need(self.mode, "mode")?,
                criterion: need(self.criterion, "criterion")?,
                value: need(self.value, "value")?,
            },
            MutationKind::SetPriority => Mutation::SetPriority {
                criterion: need(self.criterion, "criterion")?,
                target_mean: need(self.target_mean, "target_mean")?,
            },
            MutationKind::ResetHabits => Mutation::ResetHabits,
            MutationKind::SetFlags => Mutation::SetFlags {
                biases: need(self.biases, "biases")?,
                habits: need(self.habits, "habits")?,
            },
        })
    }
}

pub async fn mutate(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> Result<Json<MutationResponse>, ApiError> {
    let m = parse_body::<MutationBody>(&body)?.into_mutation()?;
    match m {
        Mutation::SetEnv { value, .. } if !(0.0..=10.0).contains(&value) => {
            return Err(ApiError::validation("value", format!("value {value} outside [0, 10]")));
        }
        Mutation::SetPriority { target_mean, .. } if !(0.0..=10.0).contains(&target_mean) => {
            return Err(ApiError::validation("target_mean", format!("target_mean {target_mean} outside [0, 10]")));
        }
        _ => {}
    }
    let s = session(&state, &id)?;
    let applied = s.touch().apply(m)?;
    Ok(Json(MutationResponse { applied }))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRequest {
    pub running: bool,
    pub ticks_per_second: Option<f64>,
}

pub async fn auto_run(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> Result<Json<AutoRun>, ApiError> {
    let req: RunRequest = parse_body(&body)?;
    let s = session(&state, &id)?;
    let current = s.lock().auto_run;
    let tps = match (req.running, req.ticks_per_second) {
        (_, Some(r)) if !(r > 0.0 && r <= MAX_TICKS_PER_SECOND) => {
            return Err(ApiError::validation(
                "ticks_per_second",
                format!("rate must be in (0, {MAX_TICKS_PER_SECOND}], got {r}"),
            ));
        }
        (_, Some(r)) => r,
        (true, None) if current.ticks_per_second > 0.0 => current.ticks_per_second,
        (true, None) => return Err(ApiError::validation("ticks_per_second", "required to start")),
        (false, None) => current.ticks_per_second,
    };
    let auto = AutoRun { running: req.running, ticks_per_second: tps };
    s.set_auto_run(auto);
    Ok(Json(auto))
}

fn query_tick(q: &HashMap<String, String>, key: &str) -> Result<Option<u64>, ApiError> {
    q.get(key)
        .map(|v| v.parse::<u64>().map_err(|_| ApiError::validation(key, format!("{key} must be a non-negative integer, got {v:?}"))))
        .transpose()
}

pub async fn metrics(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> Result<Json<FramesResponse>, ApiError> {
    let from = query_tick(&q, "from")?.unwrap_or(0);
    let to = query_tick(&q, "to")?;
    let s = session(&state, &id)?;
    let g = s.touch();
    let to = to.unwrap_or(g.sim.tick);
    Ok(Json(FramesResponse { frames: g.frames_between(from, to) }))
}

pub async fn snapshot(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<Snapshot>, ApiError> {
    let s = session(&state, &id)?;
    let snap = s.touch().sim.to_snapshot();
    Ok(Json(snap))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ReplayLog {
    pub bundle: CalibrationBundle,
    pub config: SimulationConfig,
    pub mutations: Vec<Applied>,
    /// The same log in the scenario language.
    pub script: String,
}

pub async fn log(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<ReplayLog>, ApiError> {
    let s = session(&state, &id)?;
    let g = s.touch();
    Ok(Json(ReplayLog {
        bundle: g.bundle.clone(),
        config: g.config,
        mutations: g.log.clone(),
        script: g.replay_script().to_string(),
    }))
}

pub async fn delete_session(State(state): State<AppState>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    state
        .registry
        .remove(&id)
        .map(|_| StatusCode::NO_CONTENT)
        .ok_or_else(|| ApiError::not_found(format!("no session {id}")))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BundleListing {
    pub bundles: Vec<crate::BundleInfo>,
}

pub async fn list_bundles(State(state): State<AppState>) -> Result<Json<BundleListing>, ApiError> {
    Ok(Json(BundleListing { bundles: state.bundles.list() }))
}

pub async fn fallback() -> ApiError {
    ApiError::not_found("no such endpoint")
}

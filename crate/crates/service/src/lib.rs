//! HTTP/JSON session API over the modechoice engine.
//!
//! | method | path | |
//! |---|---|---|
//! | POST | `/sessions` | create; body `{bundle?, bundle_inline?, config?, client_token?}` |
//! | GET | `/sessions/{id}` | session summary |
//! | POST | `/sessions/{id}/step` | `{n}` ticks, returns the new frames |
//! | POST | `/sessions/{id}/mutations` | `{"kind": "set-env", ...}`, applied before the next tick |
//! | POST | `/sessions/{id}/run` | `{running, ticks_per_second}` auto-run control |
//! | GET | `/sessions/{id}/metrics?from&to` | logged frames, both bounds inclusive |
//! | GET | `/sessions/{id}/snapshot` | engine snapshot |
//! | GET | `/sessions/{id}/log` | bundle, config and mutation log for replay |
//! | DELETE | `/sessions/{id}` | |
//! | GET | `/bundles` | available calibration bundles |
//!
//! Errors are `{code, message, field?}` with a matching HTTP status.

mod api;
mod error;
mod session;

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use axum::routing::{get, post};
use axum::Router;
use modechoice::CalibrationBundle;
use serde::{Deserialize, Serialize};

pub use api::{
    BundleListing, CreateRequest, CreateResponse, FramesResponse, MutationResponse, ReplayLog, SessionInfo,
    MAX_STEP, MAX_TICKS_PER_SECOND,
};
pub use error::{ApiError, ErrorBody};
pub use session::AutoRun;

/// Name under which the built-in bundle is listed.
pub const REFERENCE_BUNDLE: &str = "reference";

pub const ENV_LISTEN: &str = "MODECHOICE_LISTEN";
pub const ENV_BUNDLE_DIR: &str = "MODECHOICE_BUNDLE_DIR";
pub const ENV_IDLE_TIMEOUT: &str = "MODECHOICE_IDLE_TIMEOUT_SECS";

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    /// Directory of `*.json` bundles offered next to the built-in one.
    pub bundle_dir: Option<PathBuf>,
    pub idle_timeout: Duration,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            listen: SocketAddr::from(([127, 0, 0, 1], 8080)),
            bundle_dir: None,
            idle_timeout: Duration::from_secs(30 * 60),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleInfo {
    pub name: String,
    pub source: String,
    pub valid: bool,
}

#[derive(Debug, Clone)]
pub struct BundleStore {
    dir: Option<PathBuf>,
}

impl BundleStore {
    fn path_of(&self, name: &str) -> Option<PathBuf> {
        let ok = !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) && !name.starts_with('.');
        let dir = self.dir.as_ref()?;
        ok.then(|| dir.join(format!("{name}.json")))
    }

    pub fn load(&self, name: &str) -> Result<CalibrationBundle, ApiError> {
        if name == REFERENCE_BUNDLE {
            return Ok(CalibrationBundle::reference());
        }
        let path = self
            .path_of(name)
            .filter(|p| p.is_file())
            .ok_or_else(|| ApiError::validation("bundle", format!("unknown bundle {name:?}")))?;
        CalibrationBundle::load(&path).map_err(|e| ApiError::validation("bundle", e.to_string()))
    }

    pub fn list(&self) -> Vec<BundleInfo> {
        let mut out = vec![BundleInfo { name: REFERENCE_BUNDLE.into(), source: "builtin".into(), valid: true }];
        let Some(dir) = &self.dir else { return out };
        let Ok(entries) = std::fs::read_dir(dir) else { return out };
        let mut files: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        files.sort();
        for p in files {
            let Some(name) = p.file_stem().and_then(|s| s.to_str()) else { continue };
            if name == REFERENCE_BUNDLE {
                continue;
            }
            out.push(BundleInfo {
                name: name.to_string(),
                source: p.display().to_string(),
                valid: CalibrationBundle::load(Path::new(&p)).is_ok(),
            });
        }
        out
    }
}

#[derive(Clone)]
pub struct AppState {
    pub config: Arc<ServiceConfig>,
    pub registry: Arc<session::Registry>,
    pub bundles: Arc<BundleStore>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        AppState {
            bundles: Arc::new(BundleStore { dir: config.bundle_dir.clone() }),
            registry: Arc::new(session::Registry::default()),
            config: Arc::new(config),
        }
    }

    pub fn session_count(&self) -> usize {
        self.registry.len()
    }

    /// Removes idle sessions now; returns how many were dropped.
    pub fn expire_idle(&self) -> usize {
        self.registry.expire(self.config.idle_timeout)
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(api::create_session))
        .route("/sessions/{id}", get(api::get_session).delete(api::delete_session))
        .route("/sessions/{id}/step", post(api::step))
        .route("/sessions/{id}/mutations", post(api::mutate))
        .route("/sessions/{id}/run", post(api::auto_run))
        .route("/sessions/{id}/metrics", get(api::metrics))
        .route("/sessions/{id}/snapshot", get(api::snapshot))
        .route("/sessions/{id}/log", get(api::log))
        .route("/bundles", get(api::list_bundles))
        .fallback(api::fallback)
        .with_state(state)
}

/// Periodically drops idle sessions.
pub fn spawn_reaper(state: AppState) -> tokio::task::JoinHandle<()> {
    let every = (state.config.idle_timeout / 4).clamp(Duration::from_millis(10), Duration::from_secs(60));
    tokio::spawn(async move {
        let mut ticker = tokio::time::interval(every);
        loop {
            ticker.tick().await;
            state.expire_idle();
        }
    })
}

/// Binds and serves until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(config.listen).await?;
    let state = AppState::new(config);
    let reaper = spawn_reaper(state.clone());
    eprintln!("listening on {}", listener.local_addr()?);
    let result = axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await;
    reaper.abort();
    result
}

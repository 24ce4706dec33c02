//! HTTP job service: upload a dataset, queue analyses, fetch their artifacts.
//!
//! Every artifact is written once when its job finishes and served from disk
//! afterwards, so repeated requests and restarts return the same bytes.

mod api;
pub mod error;
pub mod store;
pub mod worker;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::DefaultBodyLimit;
use axum::routing::{get, post};
use axum::Router;

pub use api::CONVERGED_HEADER;
pub use store::{JobRecord, JobState, Store};
pub use worker::Queue;

/// Settings read from `SSN_DATA_DIR`, `SSN_BIND_ADDR`, `SSN_WORKERS` and
/// `SSN_QUEUE_CAPACITY`.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub data_dir: PathBuf,
    pub bind_addr: SocketAddr,
    pub workers: usize,
    pub queue_capacity: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            data_dir: PathBuf::from("ssn-data"),
            bind_addr: SocketAddr::from(([127, 0, 0, 1], 8080)),
            workers: 2,
            queue_capacity: 64,
        }
    }
}

impl Config {
    pub fn from_env() -> Result<Config, String> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Config, String> {
        let mut c = Config::default();
        if let Some(v) = get("SSN_DATA_DIR") {
            c.data_dir = PathBuf::from(v);
        }
        if let Some(v) = get("SSN_BIND_ADDR") {
            c.bind_addr = v.parse().map_err(|e| format!("SSN_BIND_ADDR {v:?}: {e}"))?;
        }
        let positive = |name: &str, v: String| match v.parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(format!("{name} must be a positive integer, got {v:?}")),
        };
        if let Some(v) = get("SSN_WORKERS") {
            c.workers = positive("SSN_WORKERS", v)?;
        }
        if let Some(v) = get("SSN_QUEUE_CAPACITY") {
            c.queue_capacity = positive("SSN_QUEUE_CAPACITY", v)?;
        }
        Ok(c)
    }
}

/// Opens the store, starts the workers, re-queues interrupted work and
/// returns the router. Must run inside a tokio runtime.
pub fn app(config: &Config) -> std::io::Result<Router> {
    let (store, queued) = Store::open(&config.data_dir)?;
    let store = Arc::new(store);
    let queue = Queue::start(store.clone(), config.workers, config.queue_capacity);
    let requeue = queue.clone();
    tokio::spawn(async move {
        for id in queued {
            requeue.push(id).await;
        }
    });
    Ok(router(store, queue))
}

/// Routes over an existing store and queue.
pub fn router(store: Arc<Store>, queue: Queue) -> Router {
    let state = api::AppState { store, queue };
    Router::new()
        .route("/datasets", post(api::upload_dataset))
        .route("/datasets/{id}", get(api::get_dataset))
        .route("/analyses", post(api::create_analysis))
        .route("/analyses/{id}", get(api::get_analysis))
        .route("/analyses/{id}/matrix", get(api::get_matrix))
        .route("/analyses/{id}/network", get(api::get_network))
        .route("/analyses/{id}/spectra", get(api::get_spectra))
        .route("/analyses/{id}/communities", get(api::get_communities))
        .fallback(api::fallback)
        .layer(DefaultBodyLimit::max(512 * 1024 * 1024))
        .with_state(state)
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    config: &Config,
    listener: tokio::net::TcpListener,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let router = app(config)?;
    axum::serve(listener, router)
        .with_graceful_shutdown(shutdown)
        .await
}

//! HTTP service: taxonomies, users and login, experiments, reports and
//! exports, all as JSON.
//!
//! Errors are returned as `{code, message, details?}` with `code` drawn from
//! [`ERROR_CODES`]. Validation failures map to 400, authentication to 401,
//! missing resources to 404 and state conflicts to 409.

mod error;
mod routes;

use std::future::Future;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::Router;
use isol_store::{Catalog, Store};
use tokio::net::TcpListener;
use tower_http::services::ServeDir;

pub use error::{status_for, ApiError, ERROR_CODES};
pub use routes::{api_router, AppState, AuthUser};

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub bind: String,
    pub store_path: PathBuf,
    pub catalog: Catalog,
    /// Directory of static assets (the browser UI) served under `/`.
    pub static_dir: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("cannot bind {addr}: {source}")]
    BindFailure { addr: String, source: std::io::Error },
    #[error("cannot open store {path}: {source}")]
    StoreOpenFailure {
        path: PathBuf,
        source: isol_store::StoreError,
    },
    #[error("server error: {0}")]
    Io(#[from] std::io::Error),
}

/// Full application: the API plus optional static assets.
pub fn app(store: Arc<Store>, static_dir: Option<PathBuf>) -> Router {
    let api = api_router(AppState { store });
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// A bound, not yet running, server.
pub struct Bound {
    pub listener: TcpListener,
    pub store: Arc<Store>,
    pub static_dir: Option<PathBuf>,
}

impl Bound {
    pub fn local_addr(&self) -> std::io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Serve until `shutdown` resolves, let in-flight requests finish and
    /// sync the store.
    pub async fn run(self, shutdown: impl Future<Output = ()> + Send + 'static) -> Result<(), ServeError> {
        let router = app(self.store.clone(), self.static_dir);
        axum::serve(self.listener, router)
            .with_graceful_shutdown(shutdown)
            .await?;
        let store = self.store;
        tokio::task::spawn_blocking(move || store.flush())
            .await
            .map_err(std::io::Error::other)?
            .map_err(|e| std::io::Error::other(e.to_string()))?;
        tracing::info!("store flushed, shut down cleanly");
        Ok(())
    }
}

pub async fn bind(config: ServerConfig) -> Result<Bound, ServeError> {
    let store = Store::open(&config.store_path, config.catalog).map_err(|source| ServeError::StoreOpenFailure {
        path: config.store_path.clone(),
        source,
    })?;
    let listener = TcpListener::bind(&config.bind)
        .await
        .map_err(|source| ServeError::BindFailure {
            addr: config.bind.clone(),
            source,
        })?;
    Ok(Bound {
        listener,
        store: Arc::new(store),
        static_dir: config.static_dir,
    })
}

pub async fn serve(config: ServerConfig) -> Result<(), ServeError> {
    let bound = bind(config).await?;
    tracing::info!(addr = %bound.local_addr()?, "listening");
    bound.run(shutdown_signal()).await
}

/// Resolves on Ctrl-C or SIGTERM.
pub async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
}

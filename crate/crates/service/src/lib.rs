//! Local vote-collection service for DSCQS sessions.
//!
//! Endpoints:
//!
//! * `GET /plan`: the full session plan (operator view).
//! * `GET /sessions/{k}/playlist`: blind BTC descriptors of session `k` with phase timing.
//! * `GET /btc/{i}`: blind descriptor of one BTC.
//! * `POST /observers`: register an observer.
//! * `POST /votes`: submit one vote; acknowledged only after a durable append.
//! * `GET /export`: the vote log as line-delimited JSON.

mod store;

use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use tokio::sync::RwLock;

use vqa_core::session::{
    BtcDescriptor, ObserverRegistration, Playlist, SessionPlan, VoteRecord, VoteSubmission,
};

pub use store::VoteStore;

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("vote store: {0}")]
    Store(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    Conflict(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: String,
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match &self {
            ServiceError::Invalid(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::Conflict(_) => StatusCode::CONFLICT,
            ServiceError::Store(_) | ServiceError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(ErrorBody { error: self.to_string() })).into_response()
    }
}

pub struct AppState {
    plan: SessionPlan,
    store: RwLock<VoteStore>,
}

impl AppState {
    pub fn new(plan: SessionPlan, store: VoteStore) -> Arc<Self> {
        Arc::new(AppState {
            plan,
            store: RwLock::new(store),
        })
    }

    pub fn open(plan: SessionPlan, store_path: impl AsRef<Path>) -> Result<Arc<Self>, ServiceError> {
        Ok(Self::new(plan, VoteStore::open(store_path)?))
    }
}

type Shared = State<Arc<AppState>>;

async fn get_plan(State(state): Shared) -> Json<SessionPlan> {
    Json(state.plan.clone())
}

async fn get_playlist(State(state): Shared, UrlPath(k): UrlPath<usize>) -> Result<Json<Playlist>, ServiceError> {
    state
        .plan
        .playlist(k)
        .map(Json)
        .ok_or_else(|| ServiceError::NotFound(format!("session {k} not in plan ({} sessions)", state.plan.sessions.len())))
}

async fn get_btc(State(state): Shared, UrlPath(i): UrlPath<u32>) -> Result<Json<BtcDescriptor>, ServiceError> {
    state
        .plan
        .descriptor(i)
        .map(Json)
        .ok_or_else(|| ServiceError::NotFound(format!("BTC {i} not in plan")))
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ServiceError> {
    payload.map(|Json(v)| v).map_err(|e| ServiceError::Invalid(e.body_text()))
}

async fn post_observer(
    State(state): Shared,
    payload: Result<Json<ObserverRegistration>, JsonRejection>,
) -> Result<(StatusCode, Json<ObserverRegistration>), ServiceError> {
    let reg = body(payload)?;
    let id = reg.observer_id.trim();
    if id.is_empty() {
        return Err(ServiceError::Invalid("observer_id is empty".into()));
    }
    let created = state.store.write().await.register(id);
    let status = if created { StatusCode::CREATED } else { StatusCode::OK };
    Ok((status, Json(ObserverRegistration { observer_id: id.to_string() })))
}

async fn post_vote(
    State(state): Shared,
    payload: Result<Json<VoteSubmission>, JsonRejection>,
) -> Result<(StatusCode, Json<VoteRecord>), ServiceError> {
    let sub = body(payload)?;
    let vote = VoteRecord {
        observer_id: sub.observer_id,
        btc_index: sub.btc_index,
        score_a: sub.score_a,
        score_b: sub.score_b,
        timestamp: chrono::Utc::now(),
    };
    vote.validate().map_err(|e| ServiceError::Invalid(e.to_string()))?;
    if state.plan.btc(vote.btc_index).is_none() {
        return Err(ServiceError::NotFound(format!("BTC {} not in plan", vote.btc_index)));
    }
    let mut store = state.store.write().await;
    if !store.is_registered(&vote.observer_id) {
        return Err(ServiceError::NotFound(format!("observer `{}` is not registered", vote.observer_id)));
    }
    if store.has_voted(&vote.observer_id, vote.btc_index) {
        return Err(ServiceError::Conflict(format!(
            "observer `{}` already voted on BTC {}",
            vote.observer_id, vote.btc_index
        )));
    }
    tokio::task::block_in_place(|| store.append(vote.clone()))?;
    Ok((StatusCode::CREATED, Json(vote)))
}

async fn get_export(State(state): Shared) -> Result<Response, ServiceError> {
    let store = state.store.read().await;
    let mut out = Vec::new();
    vqa_core::session::write_votes(&mut out, store.votes()).map_err(|e| ServiceError::Store(e.to_string()))?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], out).into_response())
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/plan", get(get_plan))
        .route("/sessions/{k}/playlist", get(get_playlist))
        .route("/btc/{i}", get(get_btc))
        .route("/observers", post(post_observer))
        .route("/votes", post(post_vote))
        .route("/export", get(get_export))
        .with_state(state)
}

/// Binds `addr` and serves until `shutdown` resolves.
pub async fn serve(
    state: Arc<AppState>,
    addr: SocketAddr,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> Result<(), ServiceError> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    serve_on(state, listener, shutdown).await
}

pub async fn serve_on(
    state: Arc<AppState>,
    listener: tokio::net::TcpListener,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> Result<(), ServiceError> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await?;
    Ok(())
}

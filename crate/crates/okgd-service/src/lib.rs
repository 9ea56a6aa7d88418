//! HTTP service exposing the detector over JSON: batch detection, synthetic
//! scenario generation, multi-seed benchmarks, and streaming detection
//! sessions (create a session, push frames as they arrive, read scored-step
//! records and alarms back).
//!
//! Endpoints:
//! - `GET  /healthz`
//! - `POST /v1/detect`                 batch run over a full frame sequence
//! - `POST /v1/synth`                  generate a scenario (graph + frames + truth)
//! - `POST /v1/bench`                  multi-seed variant comparison
//! - `POST /v1/sessions`               create a streaming session
//! - `GET  /v1/sessions/{id}`          session status
//! - `POST /v1/sessions/{id}/frames`   push a batch of frames
//! - `GET  /v1/sessions/{id}/result`   detection result so far
//! - `DELETE /v1/sessions/{id}`        drop a session
//!
//! CPU-heavy work runs on the blocking pool; a session is exclusive to one
//! in-flight push (concurrent pushes get 409).

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};

use okgd_core::api::{
    BenchRequest, BenchResponse, CreateSessionRequest, CreateSessionResponse, DetectRequest,
    DetectResponse, ErrorBody, PushFramesRequest, PushFramesResponse, SessionPhase,
    SessionStatus, SynthRequest, SynthResponse,
};
use okgd_core::detector::{run, DetectionResult, Detector, StepOutcome, StepRecord};
use okgd_core::eval::run_bench;
use okgd_core::{derive_seed, Error, Frame};

pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError { status, message: message.into() }
    }

    fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, format!("no session {id}"))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(ErrorBody { error: self.message })).into_response()
    }
}

impl From<Error> for ApiError {
    fn from(err: Error) -> Self {
        let status = match err {
            Error::Config(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        ApiError::new(status, err.to_string())
    }
}

struct Session {
    detector: Detector,
    records: Vec<StepRecord>,
}

impl Session {
    fn status(&self) -> SessionStatus {
        let phase = if self.detector.is_stopped() {
            SessionPhase::Stopped
        } else if self.detector.burn_in_complete() {
            SessionPhase::Online
        } else {
            SessionPhase::BurnIn
        };
        SessionStatus {
            phase,
            t: self.detector.frames_consumed(),
            scored_steps: self.detector.scored_steps(),
            alarms: self.detector.alarms().to_vec(),
            dictionary_sizes: self.detector.dictionary_sizes(),
        }
    }

    fn push(&mut self, frames: Vec<Frame>) -> Result<(Vec<StepRecord>, usize), Error> {
        let mut new_records = Vec::new();
        let mut consumed = 0;
        for frame in frames {
            match self.detector.feed(frame)? {
                StepOutcome::Stopped => break,
                StepOutcome::Scored(r) => {
                    new_records.push(r.clone());
                    self.records.push(r);
                    consumed += 1;
                }
                StepOutcome::BurnIn | StepOutcome::Filling => consumed += 1,
            }
        }
        Ok((new_records, consumed))
    }

    fn result(&self) -> DetectionResult {
        DetectionResult {
            detected: !self.detector.alarms().is_empty(),
            tau_hat: self.detector.alarms().first().copied(),
            alarms: self.detector.alarms().to_vec(),
            records: self.records.clone(),
            dictionary_sizes: self.detector.dictionary_sizes(),
            frames_consumed: self.detector.frames_consumed(),
        }
    }
}

/// `None` marks a session checked out by an in-flight push.
type SessionSlot = Option<Session>;

#[derive(Default)]
pub struct AppState {
    sessions: Mutex<HashMap<String, SessionSlot>>,
}

pub fn router() -> Router {
    Router::new()
        .route("/healthz", get(health))
        .route("/v1/detect", post(detect))
        .route("/v1/synth", post(synth))
        .route("/v1/bench", post(bench))
        .route("/v1/sessions", post(create_session))
        .route("/v1/sessions/{id}", get(session_status).delete(delete_session))
        .route("/v1/sessions/{id}/frames", post(push_frames))
        .route("/v1/sessions/{id}/result", get(session_result))
        // long streams arrive as one JSON body; the 2 MB default is far too
        // small for seismic-scale uploads
        .layer(DefaultBodyLimit::max(256 * 1024 * 1024))
        .with_state(Arc::new(AppState::default()))
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

async fn detect(Json(req): Json<DetectRequest>) -> Result<Json<DetectResponse>, ApiError> {
    let result = tokio::task::spawn_blocking(move || -> Result<DetectionResult, Error> {
        let graph = req.graph.to_graph()?;
        run(req.frames, &req.config, &graph, req.continue_after_alarm)
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok(Json(DetectResponse { result }))
}

async fn synth(Json(req): Json<SynthRequest>) -> Result<Json<SynthResponse>, ApiError> {
    let resp = tokio::task::spawn_blocking(move || -> Result<SynthResponse, Error> {
        let scenario = req.spec.build(req.seed)?;
        let frames = scenario.emit_frames(derive_seed(req.seed, 1));
        Ok(SynthResponse {
            graph: okgd_core::api::GraphDto::from_graph(&scenario.graph),
            labels: scenario.labels.clone(),
            dims: scenario.node_dims(),
            frames,
            tau: scenario.tau,
            changed: scenario.changed.clone(),
        })
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok(Json(resp))
}

async fn bench(Json(req): Json<BenchRequest>) -> Result<Json<BenchResponse>, ApiError> {
    let report = tokio::task::spawn_blocking(move || {
        run_bench(
            &req.spec,
            &req.config,
            &req.variants,
            req.n_seeds,
            req.delay_budget,
            req.tolerance_window,
        )
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok(Json(BenchResponse { report }))
}

async fn create_session(
    State(state): State<Arc<AppState>>,
    Json(req): Json<CreateSessionRequest>,
) -> Result<Json<CreateSessionResponse>, ApiError> {
    let graph = req.graph.to_graph()?;
    let detector = Detector::with_options(req.config, graph, req.continue_after_alarm)?;
    let id = uuid::Uuid::new_v4().to_string();
    let session = Session { detector, records: Vec::new() };
    state
        .sessions
        .lock()
        .expect("session map poisoned")
        .insert(id.clone(), Some(session));
    Ok(Json(CreateSessionResponse { session_id: id }))
}

async fn session_status(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<SessionStatus>, ApiError> {
    let guard = state.sessions.lock().expect("session map poisoned");
    match guard.get(&id) {
        Some(Some(session)) => Ok(Json(session.status())),
        Some(None) => Err(ApiError::new(StatusCode::CONFLICT, "session is busy")),
        None => Err(ApiError::not_found(&id)),
    }
}

async fn session_result(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<DetectResponse>, ApiError> {
    let guard = state.sessions.lock().expect("session map poisoned");
    match guard.get(&id) {
        Some(Some(session)) => Ok(Json(DetectResponse { result: session.result() })),
        Some(None) => Err(ApiError::new(StatusCode::CONFLICT, "session is busy")),
        None => Err(ApiError::not_found(&id)),
    }
}

async fn delete_session(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<StatusCode, ApiError> {
    let removed = state
        .sessions
        .lock()
        .expect("session map poisoned")
        .remove(&id);
    match removed {
        Some(_) => Ok(StatusCode::NO_CONTENT),
        None => Err(ApiError::not_found(&id)),
    }
}

async fn push_frames(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(req): Json<PushFramesRequest>,
) -> Result<Json<PushFramesResponse>, ApiError> {
    let mut session = {
        let mut guard = state.sessions.lock().expect("session map poisoned");
        let slot = guard.get_mut(&id).ok_or_else(|| ApiError::not_found(&id))?;
        slot.take()
            .ok_or_else(|| ApiError::new(StatusCode::CONFLICT, "session is busy"))?
    };

    let (session_back, outcome) = tokio::task::spawn_blocking(move || {
        let outcome = session.push(req.frames);
        (session, outcome)
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;

    let status = session_back.status();
    {
        // put the session back unless it was deleted while busy
        let mut guard = state.sessions.lock().expect("session map poisoned");
        if let Some(slot) = guard.get_mut(&id) {
            *slot = Some(session_back);
        }
    }
    let (records, consumed) = outcome?;
    Ok(Json(PushFramesResponse { records, consumed, status }))
}

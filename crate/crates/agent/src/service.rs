//! HTTP+JSON interface. Mutations take the write lock, so they are applied
//! one at a time; queries share the read lock and only touch counters.

use std::sync::{Arc, RwLock};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use scd_core::{ScdId, WindowId};
use serde::{Deserialize, Serialize};

use crate::agent::{Agent, RestoreOutcome, ScdView, SentenceView, VersionList};
use crate::counters::CounterSnapshot;
use crate::error::AgentError;
use crate::feedback::{FeedbackEvent, FeedbackOutcome};
use crate::ifi::IfiReport;
use crate::query::{IrResponse, Query};

pub type SharedAgent = Arc<RwLock<Agent>>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IfiRequest {
    pub theta_refresh: Option<u64>,
    pub theta_fresh: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestoreRequest {
    pub version: u64,
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: String,
}

pub struct ApiError(AgentError);

impl From<AgentError> for ApiError {
    fn from(e: AgentError) -> Self {
        ApiError(e)
    }
}

pub fn status_of(e: &AgentError) -> StatusCode {
    use scd_core::Error as E;
    match e {
        AgentError::UnknownVersion(_) => StatusCode::NOT_FOUND,
        AgentError::EmptyModel => StatusCode::CONFLICT,
        AgentError::EmptyQuery | AgentError::InvalidRequest(_) => StatusCode::BAD_REQUEST,
        AgentError::Config(_) | AgentError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        AgentError::Core(core) => match core {
            E::UnknownScd(_) | E::UnknownSentence(_) => StatusCode::NOT_FOUND,
            E::NoReceivingScd(_) => StatusCode::CONFLICT,
            E::InternalInconsistency(_) | E::Inconsistent(_) | E::Io(_) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
            _ => StatusCode::BAD_REQUEST,
        },
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = status_of(&self.0);
        if status.is_server_error() {
            tracing::error!(error = %self.0, "request failed");
        }
        (
            status,
            Json(ErrorBody {
                error: self.0.to_string(),
            }),
        )
            .into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

pub fn router(agent: SharedAgent) -> Router {
    Router::new()
        .route("/query", post(query))
        .route("/feedback", post(feedback))
        .route("/ifi", post(ifi))
        .route("/model/versions", get(versions))
        .route("/model/restore", post(restore))
        .route("/scd/{id}", get(scd))
        .route("/sentence/{window_id}", get(sentence))
        .route("/counters", get(counters))
        .with_state(agent)
}

async fn query(State(agent): State<SharedAgent>, Json(q): Json<Query>) -> ApiResult<IrResponse> {
    let agent = agent.read().expect("agent lock");
    Ok(Json(agent.answer_query(&q)?))
}

async fn feedback(
    State(agent): State<SharedAgent>,
    Json(ev): Json<FeedbackEvent>,
) -> ApiResult<FeedbackOutcome> {
    let mut agent = agent.write().expect("agent lock");
    Ok(Json(agent.perceive(ev)?))
}

async fn ifi(
    State(agent): State<SharedAgent>,
    Json(req): Json<IfiRequest>,
) -> ApiResult<IfiReport> {
    let mut agent = agent.write().expect("agent lock");
    Ok(Json(
        agent.enhance_scds(req.theta_refresh, req.theta_fresh)?,
    ))
}

async fn versions(State(agent): State<SharedAgent>) -> Json<VersionList> {
    Json(agent.read().expect("agent lock").versions())
}

async fn restore(
    State(agent): State<SharedAgent>,
    Json(req): Json<RestoreRequest>,
) -> ApiResult<RestoreOutcome> {
    let mut agent = agent.write().expect("agent lock");
    Ok(Json(agent.restore(req.version)?))
}

async fn scd(State(agent): State<SharedAgent>, Path(id): Path<u64>) -> ApiResult<ScdView> {
    Ok(Json(agent.read().expect("agent lock").scd_view(ScdId(id))?))
}

async fn sentence(
    State(agent): State<SharedAgent>,
    Path(id): Path<u64>,
) -> ApiResult<SentenceView> {
    Ok(Json(
        agent
            .read()
            .expect("agent lock")
            .sentence_view(WindowId(id))?,
    ))
}

async fn counters(State(agent): State<SharedAgent>) -> Json<CounterSnapshot> {
    Json(agent.read().expect("agent lock").counter_snapshot())
}

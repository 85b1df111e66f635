//! Stateless JSON service over the simulation pipeline.
//!
//! | route               | body           | reply                                |
//! |---------------------|----------------|--------------------------------------|
//! | `GET /api/plants`   |                | plant registry                       |
//! | `GET /api/scenarios`|                | built-in scenarios                   |
//! | `POST /api/simulate`| scenario       | run result; 422 if the loop is unstable |
//! | `POST /api/sweep`   | scenario       | one row per `sweep` entry            |
//! | `POST /api/margins` | scenario       | margins with and without canceller   |
//!
//! Request bodies use the scenario file keys. Validation failures answer 400
//! with `{"error": ..., "field": ...}`.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;

use fraccancel::bench::{builtin_scenarios, field_from_message, plants, Scenario, ScenarioFile};
use fraccancel::ilt::IltParams;
use fraccancel::Error;

use crate::run::{margin_report, simulate, sweep};

pub const DEFAULT_PORT: u16 = 8780;

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: String,
    field: Option<String>,
}

fn error(status: StatusCode, error: String, field: Option<String>) -> Response {
    (status, Json(ErrorBody { error, field })).into_response()
}

fn core_error(e: Error) -> Response {
    let status = match e {
        Error::InvalidArgument { .. } | Error::Schema { .. } | Error::Unknown { .. } => {
            StatusCode::BAD_REQUEST
        }
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    };
    let field = e.field_path().map(str::to_string);
    error(status, e.to_string(), field)
}

fn parse(body: &Bytes) -> Result<Scenario, Response> {
    let de = &mut serde_json::Deserializer::from_slice(body);
    let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let message = e.inner().to_string();
        // a missing key is reported against its parent
        let field = field_from_message(&message)
            .filter(|_| message.starts_with("missing field"))
            .map(str::to_string)
            .or_else(|| (path != ".").then_some(path));
        error(StatusCode::BAD_REQUEST, message, field)
    })?;
    Scenario::from_file(file).map_err(core_error)
}

async fn compute<T, F>(f: F) -> Result<T, Response>
where
    T: Send + 'static,
    F: FnOnce() -> fraccancel::Result<T> + Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string(), None))?
        .map_err(core_error)
}

async fn list_plants() -> Response {
    Json(plants()).into_response()
}

async fn list_scenarios() -> Response {
    let files: Vec<ScenarioFile> = builtin_scenarios().iter().map(|s| s.to_file().clone()).collect();
    Json(files).into_response()
}

async fn post_simulate(State(params): State<Arc<IltParams>>, body: Bytes) -> Response {
    let s = match parse(&body) {
        Ok(s) => s,
        Err(r) => return r,
    };
    match compute(move || simulate(&s, &params).map(|(r, _)| r)).await {
        Ok(r) if r.stable => Json(r).into_response(),
        Ok(r) => (StatusCode::UNPROCESSABLE_ENTITY, Json(r)).into_response(),
        Err(r) => r,
    }
}

async fn post_sweep(State(params): State<Arc<IltParams>>, body: Bytes) -> Response {
    let s = match parse(&body) {
        Ok(s) => s,
        Err(r) => return r,
    };
    match compute(move || sweep(&s, &s.sweep_or_nominal(), &params)).await {
        Ok(r) => Json(r).into_response(),
        Err(r) => r,
    }
}

async fn post_margins(body: Bytes) -> Response {
    let s = match parse(&body) {
        Ok(s) => s,
        Err(r) => return r,
    };
    match compute(move || margin_report(&s)).await {
        Ok(r) => Json(r).into_response(),
        Err(r) => r,
    }
}

pub fn router(params: IltParams) -> Router {
    Router::new()
        .route("/api/plants", get(list_plants))
        .route("/api/scenarios", get(list_scenarios))
        .route("/api/simulate", post(post_simulate))
        .route("/api/sweep", post(post_sweep))
        .route("/api/margins", post(post_margins))
        .with_state(Arc::new(params))
}

pub async fn serve(bind: &str, params: IltParams) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(bind).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(params)).await?;
    Ok(())
}

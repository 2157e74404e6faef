//! SPARQL protocol endpoint: `GET /sparql?query=`, `POST /sparql` with a
//! form-encoded `query` field or the query as the request body, and
//! `GET /health`.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::Serialize;
use vweave_core::results::to_json_string;
use vweave_core::vtable::CacheStats;
use vweave_core::{Engine, EngineError};

pub const RESULTS_JSON: &str = "application/sparql-results+json";

#[derive(Clone)]
pub struct AppState {
    engine: Arc<Engine>,
    started: Instant,
}

impl AppState {
    pub fn new(engine: Engine) -> Self {
        Self {
            engine: Arc::new(engine),
            started: Instant::now(),
        }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sparql", get(sparql_get).post(sparql_post))
        .route("/health", get(health))
        .with_state(state)
}

fn text(status: StatusCode, body: String) -> Response {
    (
        status,
        [(header::CONTENT_TYPE, "text/plain; charset=utf-8")],
        body,
    )
        .into_response()
}

fn error_response(e: &EngineError) -> Response {
    if let EngineError::Parse(p) = e {
        return text(StatusCode::BAD_REQUEST, p.diagnostic("query") + "\n");
    }
    let status = if e.is_upstream() {
        StatusCode::BAD_GATEWAY
    } else {
        StatusCode::INTERNAL_SERVER_ERROR
    };
    text(status, format!("{e}\n"))
}

async fn run(state: AppState, query: String) -> Response {
    let engine = state.engine.clone();
    let answered = tokio::task::spawn_blocking(move || engine.answer(&query)).await;
    match answered {
        Ok(Ok(a)) => {
            tracing::info!(
                solutions = a.solutions.len(),
                fetches = a.fetches,
                "answered"
            );
            (
                [(header::CONTENT_TYPE, RESULTS_JSON)],
                to_json_string(&a.variables, &a.solutions),
            )
                .into_response()
        }
        Ok(Err(e)) => {
            tracing::warn!(error = %e, "query failed");
            error_response(&e)
        }
        Err(e) => text(StatusCode::INTERNAL_SERVER_ERROR, format!("{e}\n")),
    }
}

async fn sparql_get(
    State(state): State<AppState>,
    Query(params): Query<HashMap<String, String>>,
) -> Response {
    match params.get("query") {
        Some(q) => run(state, q.clone()).await,
        None => text(
            StatusCode::BAD_REQUEST,
            "missing 'query' parameter\n".into(),
        ),
    }
}

async fn sparql_post(State(state): State<AppState>, headers: HeaderMap, body: Bytes) -> Response {
    let content_type = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .unwrap_or("");
    let query = if content_type.starts_with("application/x-www-form-urlencoded") {
        let form: HashMap<String, String> = match serde_urlencoded::from_bytes(&body) {
            Ok(f) => f,
            Err(_) => return text(StatusCode::BAD_REQUEST, "malformed form body\n".into()),
        };
        match form.get("query") {
            Some(q) => q.clone(),
            None => return text(StatusCode::BAD_REQUEST, "missing 'query' field\n".into()),
        }
    } else {
        match String::from_utf8(body.to_vec()) {
            Ok(q) => q,
            Err(_) => return text(StatusCode::BAD_REQUEST, "query is not UTF-8\n".into()),
        }
    };
    run(state, query).await
}

#[derive(Serialize)]
struct Health {
    name: &'static str,
    version: &'static str,
    uptime_ms: u128,
    cache: CacheStats,
}

async fn health(State(state): State<AppState>) -> Json<Health> {
    Json(Health {
        name: "vweave",
        version: env!("CARGO_PKG_VERSION"),
        uptime_ms: state.started.elapsed().as_millis(),
        cache: state.engine.runtime().stats(),
    })
}

/// Serves until interrupted.
pub async fn serve(engine: Engine, listen: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(listen).await?;
    tracing::info!(address = %listener.local_addr()?, "listening");
    axum::serve(listener, router(AppState::new(engine)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

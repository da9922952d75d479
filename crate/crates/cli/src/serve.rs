//! HTTP front end: the same query path as the CLI behind POST /query,
//! plus GET /health. The listener binds immediately and answers 503
//! until the artifacts finish loading in the background, so orchestrators
//! can health-check the process from the moment it starts.

use std::sync::{Arc, RwLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;

use fuserag_core::config::PipelineConfig;
use fuserag_core::pipeline::{ErrorClass, Pipeline, PipelineError, Variant};

use crate::{health_body, run_query};

enum LoadState {
    Loading,
    Ready(Arc<Pipeline>),
    Failed(String),
}

#[derive(Clone)]
struct AppState {
    pipeline: Arc<RwLock<LoadState>>,
}

/// Binds the listener, starts loading artifacts in the background, and
/// serves until the process is terminated. The bound address is printed
/// on stdout once the socket is open (useful with port 0).
pub fn run_serve(
    config: PipelineConfig,
    bind_override: Option<String>,
) -> Result<(), PipelineError> {
    let bind = bind_override.unwrap_or_else(|| config.bind.clone());
    config.validate()?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let state = AppState {
            pipeline: Arc::new(RwLock::new(LoadState::Loading)),
        };
        let loader_state = state.clone();
        tokio::task::spawn_blocking(move || {
            let outcome = match Pipeline::load(config) {
                Ok(p) => LoadState::Ready(Arc::new(p)),
                Err(e) => LoadState::Failed(e.to_string()),
            };
            *loader_state.pipeline.write().expect("load state lock") = outcome;
        });

        let app = Router::new()
            .route("/query", post(query_handler))
            .route("/health", get(health_handler))
            .with_state(state);
        let listener = tokio::net::TcpListener::bind(&bind).await?;
        let addr = listener.local_addr()?;
        println!("listening on http://{addr}");
        use std::io::Write as _;
        std::io::stdout().flush().ok();
        axum::serve(listener, app).await?;
        Ok(())
    })
}

#[derive(Debug, Deserialize)]
struct QueryRequest {
    question: String,
    #[serde(default)]
    query_id: Option<String>,
    #[serde(default)]
    variant: Option<String>,
}

fn error_response(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

// A `Response` error variant is what the callers send back verbatim;
// boxing it would only add indirection on the error path.
#[allow(clippy::result_large_err)]
fn ready_pipeline(state: &AppState) -> Result<Arc<Pipeline>, Response> {
    match &*state.pipeline.read().expect("load state lock") {
        LoadState::Ready(p) => Ok(p.clone()),
        LoadState::Loading => Err(error_response(
            StatusCode::SERVICE_UNAVAILABLE,
            "artifacts are still loading",
        )),
        LoadState::Failed(msg) => Err(error_response(
            StatusCode::SERVICE_UNAVAILABLE,
            format!("artifacts failed to load: {msg}"),
        )),
    }
}

async fn query_handler(
    State(state): State<AppState>,
    body: Result<Json<QueryRequest>, JsonRejection>,
) -> Response {
    let Json(request) = match body {
        Ok(b) => b,
        Err(rejection) => {
            return error_response(StatusCode::BAD_REQUEST, rejection.body_text());
        }
    };
    let pipeline = match ready_pipeline(&state) {
        Ok(p) => p,
        Err(response) => return response,
    };
    let variant = match request
        .variant
        .as_deref()
        .unwrap_or(Variant::Ensemble.as_str())
        .parse::<Variant>()
    {
        Ok(v) => v,
        Err(msg) => return error_response(StatusCode::BAD_REQUEST, msg),
    };
    let query_id = request.query_id.unwrap_or_else(|| "q1".to_string());
    let question = request.question;
    let outcome = tokio::task::spawn_blocking(move || {
        run_query(&pipeline, &query_id, &question, variant)
    })
    .await;
    match outcome {
        Ok(Ok(body)) => Json(body).into_response(),
        Ok(Err(e)) => {
            let status = match e.class() {
                ErrorClass::Usage => StatusCode::BAD_REQUEST,
                ErrorClass::Transport => StatusCode::BAD_GATEWAY,
                ErrorClass::Data => StatusCode::INTERNAL_SERVER_ERROR,
            };
            error_response(status, e.to_string())
        }
        Err(join_error) => error_response(
            StatusCode::INTERNAL_SERVER_ERROR,
            format!("query task failed: {join_error}"),
        ),
    }
}

async fn health_handler(State(state): State<AppState>) -> Response {
    match ready_pipeline(&state) {
        Ok(pipeline) => Json(health_body(&pipeline)).into_response(),
        Err(_) => (
            StatusCode::SERVICE_UNAVAILABLE,
            Json(json!({ "status": "loading" })),
        )
            .into_response(),
    }
}

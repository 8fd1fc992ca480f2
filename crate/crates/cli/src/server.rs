//! HTTP front end: each request runs the pipeline on a blocking worker and
//! answers with the run summary plus base64 STL payloads.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use morphfab_core::mesh::write_stl;
use morphfab_core::pipeline::{
    run_pipeline, PipelineConfig, PipelineReport, PipelineRun, ReportMotor, ReportPlacement, ReportRoute,
    SolverReport, StageStatus,
};
use morphfab_core::score::{DesignOutcome, ScoreBounds, ScoreBundle};
use morphfab_core::voxel::parse_morphology;
use serde::{Deserialize, Serialize};
use tower_http::cors::CorsLayer;

const BODY_LIMIT: usize = 64 * 1024 * 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshPayload {
    pub part: String,
    pub format: String,
    pub data: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placements {
    pub motors: Vec<ReportMotor>,
    pub electronics: Vec<ReportPlacement>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureSummary {
    pub stage: String,
    pub reason: String,
    pub detail: String,
    pub joint: Option<u32>,
    pub segment: Option<u32>,
}

/// Body of every `/v1/pipeline` answer that got as far as running the
/// pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineResponse {
    pub status: String,
    pub design: String,
    pub outcome: DesignOutcome,
    pub failure: Option<FailureSummary>,
    pub reports: Vec<SolverReport>,
    pub timings_ms: BTreeMap<String, f64>,
    pub scores: ScoreBundle,
    pub normalization_bounds: ScoreBounds,
    pub meshes: Vec<MeshPayload>,
    pub placements: Placements,
    pub routes: Vec<ReportRoute>,
    pub total_length_mm: f64,
    pub max_curvature_per_mm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub status: String,
    pub error: String,
}

impl PipelineResponse {
    pub fn from_run(run: &PipelineRun, config: &PipelineConfig) -> Self {
        let report = PipelineReport::from_run(run, config);
        let failure = run.failure().and_then(|(r, reason)| match &r.status {
            StageStatus::Failure { detail, joint, segment, .. } => Some(FailureSummary {
                stage: r.stage.as_str().into(),
                reason: reason.as_str().into(),
                detail: detail.clone(),
                joint: *joint,
                segment: *segment,
            }),
            StageStatus::Success => None,
        });
        let meshes = if run.is_blueprint() {
            run.rigid_parts
                .values()
                .chain(run.skin.as_ref())
                .map(|p| MeshPayload {
                    part: p.label.clone(),
                    format: "stl-base64".into(),
                    data: STANDARD.encode(write_stl(&p.mesh)),
                })
                .collect()
        } else {
            Vec::new()
        };
        Self {
            status: report.status,
            design: report.design,
            outcome: report.outcome,
            failure,
            reports: report.stages,
            timings_ms: run.timings.iter().map(|(s, d)| (s.as_str().to_string(), d.as_secs_f64() * 1e3)).collect(),
            scores: report.scores,
            normalization_bounds: report.normalization_bounds,
            meshes,
            placements: Placements { motors: report.motors, electronics: report.electronics },
            routes: report.routes,
            total_length_mm: report.total_length_mm,
            max_curvature_per_mm: report.max_curvature_per_mm,
        }
    }
}

fn error(code: StatusCode, message: impl Into<String>) -> Response {
    (code, Json(ErrorBody { status: "error".into(), error: message.into() })).into_response()
}

async fn pipeline(State(config): State<Arc<PipelineConfig>>, body: Bytes) -> Response {
    let spec = match parse_morphology(&body) {
        Ok(spec) => spec,
        Err(e) => return error(StatusCode::BAD_REQUEST, e.to_string()),
    };
    let result = tokio::task::spawn_blocking(move || {
        let run = run_pipeline(&spec, &config)?;
        Ok::<_, morphfab_core::pipeline::PipelineError>(PipelineResponse::from_run(&run, &config))
    })
    .await;
    match result {
        Ok(Ok(response)) => {
            let code = if response.failure.is_some() { StatusCode::UNPROCESSABLE_ENTITY } else { StatusCode::OK };
            (code, Json(response)).into_response()
        }
        Ok(Err(e)) => error(StatusCode::BAD_REQUEST, e.to_string()),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

async fn get_config(State(config): State<Arc<PipelineConfig>>) -> Json<PipelineConfig> {
    Json((*config).clone())
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok", "version": env!("CARGO_PKG_VERSION") }))
}

pub fn router(config: PipelineConfig) -> Router {
    Router::new()
        .route("/v1/pipeline", post(pipeline))
        .route("/v1/config", get(get_config))
        .route("/v1/health", get(health))
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .layer(CorsLayer::permissive())
        .with_state(Arc::new(config))
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(config: PipelineConfig, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(config)).await
}

//! HTTP/JSON interface: schema ingestion, provenance capture and queries.
//!
//! | route | body | success |
//! |---|---|---|
//! | `POST /schema/gcs` | `{"entities": [...]}` | 201 |
//! | `POST /schema/lcs` | data store descriptor, optional `location` | 201 |
//! | `POST /schema/alias` | one mapping or `{"aliases": [...]}` | 201 |
//! | `POST /provenance/workflows` | workflow definition | 201 |
//! | `POST /provenance/executions` | `{"workflow": ...}` | 201 |
//! | `POST /provenance/executions/{id}/transformations` | `{"name", "values"}` | 201 |
//! | `POST /provenance/executions/{id}/end` | none | 200 |
//! | `POST /query` | `{"text", "explain"}` | 200 |
//!
//! Execution ids may be given in full (percent-encoded) or as the numeric
//! sequence number.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::catalog::NodeId;
use crate::error::Error;
use crate::federation::Row;
use crate::mediator::{Mediator, QueryStats};
use crate::metrics::{self, ComplexityReport};
use crate::planner::{FederatedPlan, PlanError};
use crate::provenance::{ProvenanceError, TransformationRecord, WorkflowDef};
use crate::registry::{AliasDocument, AliasMapping, DataStoreDescriptor, GcsDocument, RegistryError};
use crate::vocab::ids;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    /// Saved after every successful mutation when set.
    pub catalog_path: Option<PathBuf>,
    /// Ingested at startup when set.
    pub fixtures: Option<PathBuf>,
    pub log_filter: String,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            listen: SocketAddr::from(([127, 0, 0, 1], 8080)),
            catalog_path: None,
            fixtures: None,
            log_filter: "info".into(),
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    mediator: Arc<RwLock<Mediator>>,
    catalog_path: Option<PathBuf>,
}

impl AppState {
    pub fn new(mediator: Mediator, catalog_path: Option<PathBuf>) -> Self {
        AppState { mediator: Arc::new(RwLock::new(mediator)), catalog_path }
    }

    pub fn mediator(&self) -> Arc<RwLock<Mediator>> {
        self.mediator.clone()
    }

    /// Runs `f` under the write lock and persists the catalog. On any
    /// failure the catalog is restored.
    fn mutate<T>(&self, f: impl FnOnce(&mut Mediator) -> Result<T, Error>) -> Result<T, ApiError> {
        let mut m = self.mediator.write().unwrap_or_else(|e| e.into_inner());
        let backup = m.catalog().clone();
        let out = f(&mut m).and_then(|out| match &self.catalog_path {
            Some(path) => m.save(path).map(|_| out),
            None => Ok(out),
        });
        if out.is_err() {
            *m.catalog_mut() = backup;
        }
        out.map_err(ApiError::from)
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError { status, body: json!({ "error": message.into() }) }
    }
}

fn registry_status(e: &RegistryError) -> StatusCode {
    match e {
        RegistryError::DuplicateEntity(_)
        | RegistryError::DuplicateStore(_)
        | RegistryError::DuplicateDataset { .. }
        | RegistryError::DuplicateAlias { .. } => StatusCode::CONFLICT,
        _ => StatusCode::UNPROCESSABLE_ENTITY,
    }
}

fn provenance_status(e: &ProvenanceError) -> StatusCode {
    match e {
        ProvenanceError::UnknownExecution(_) => StatusCode::NOT_FOUND,
        ProvenanceError::ClosedExecution(_) | ProvenanceError::DuplicateTransformation { .. } => StatusCode::CONFLICT,
        _ => StatusCode::UNPROCESSABLE_ENTITY,
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        let status = match &e {
            Error::Parse(p) => {
                return ApiError {
                    status: StatusCode::BAD_REQUEST,
                    body: json!({
                        "error": message,
                        "line": p.line,
                        "column": p.column,
                        "expected": p.expected,
                        "found": p.found,
                    }),
                }
            }
            Error::Registry(r) | Error::Plan(PlanError::Registry(r)) => registry_status(r),
            Error::Provenance(p) | Error::Plan(PlanError::Provenance(p)) => provenance_status(p),
            Error::Validation(_) | Error::Plan(_) | Error::Format { .. } | Error::Usage(_) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            Error::Catalog(_) | Error::Federation(_) | Error::Io { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, message)
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, r.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Deserialize)]
pub struct LcsRequest {
    #[serde(flatten)]
    pub descriptor: DataStoreDescriptor,
    /// Directory holding the store's contents.
    #[serde(default)]
    pub location: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum AliasBody {
    One(AliasMapping),
    Many(AliasDocument),
}

#[derive(Debug, Deserialize)]
pub struct BeginRequest {
    pub workflow: String,
}

#[derive(Debug, Deserialize)]
pub struct QueryRequest {
    pub text: String,
    #[serde(default)]
    pub explain: bool,
}

#[derive(Debug, Serialize)]
pub struct PlanSummary {
    pub plan: FederatedPlan,
    pub complexity: ComplexityReport,
}

#[derive(Debug, Serialize)]
pub struct QueryResponse {
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
    pub stats: QueryStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rendered_sql: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanSummary>,
}

fn created(body: Value) -> (StatusCode, Json<Value>) {
    (StatusCode::CREATED, Json(body))
}

async fn post_gcs(State(s): State<AppState>, body: Result<Json<GcsDocument>, JsonRejection>) -> ApiResult<impl IntoResponse> {
    let Json(doc) = body?;
    let names: Vec<String> = doc.entities.iter().map(|e| e.name.clone()).collect();
    s.mutate(|m| Ok(m.catalog_mut().registry_mut().register_gcs(&doc.entities)?))?;
    Ok(created(json!({ "entities": names })))
}

async fn post_lcs(State(s): State<AppState>, body: Result<Json<LcsRequest>, JsonRejection>) -> ApiResult<impl IntoResponse> {
    let Json(req) = body?;
    let name = req.descriptor.name.clone();
    s.mutate(|m| {
        m.catalog_mut().atomically(|g| -> Result<(), Error> {
            let mut reg = g.registry_mut();
            reg.register_lcs(&req.descriptor)?;
            if let Some(loc) = &req.location {
                reg.set_store_location(&req.descriptor.name, loc)?;
            }
            Ok(())
        })?;
        m.attach_store(&name)
    })?;
    Ok(created(json!({ "store": name })))
}

async fn post_alias(State(s): State<AppState>, body: Result<Json<AliasBody>, JsonRejection>) -> ApiResult<impl IntoResponse> {
    let Json(body) = body?;
    let aliases = match body {
        AliasBody::One(a) => vec![a],
        AliasBody::Many(d) => d.aliases,
    };
    s.mutate(|m| {
        m.catalog_mut().atomically(|g| -> Result<(), Error> {
            let mut reg = g.registry_mut();
            for a in &aliases {
                reg.create_alias(a)?;
            }
            Ok(())
        })
    })?;
    Ok(created(json!({ "aliases": aliases.len() })))
}

async fn post_workflow(State(s): State<AppState>, body: Result<Json<WorkflowDef>, JsonRejection>) -> ApiResult<impl IntoResponse> {
    let Json(def) = body?;
    s.mutate(|m| Ok(m.catalog_mut().provenance_mut().register_workflow(&def)?))?;
    Ok(created(json!({ "workflow": def.name })))
}

fn execution_json(id: &NodeId) -> Value {
    let seq = id.as_str().rsplit('/').next().and_then(|s| s.parse::<u64>().ok());
    json!({ "id": id, "seq": seq })
}

fn execution_id(raw: &str) -> String {
    match raw.parse::<u64>() {
        Ok(seq) => ids::execution(seq).to_string(),
        Err(_) => raw.to_owned(),
    }
}

async fn begin_execution(State(s): State<AppState>, body: Result<Json<BeginRequest>, JsonRejection>) -> ApiResult<impl IntoResponse> {
    let Json(req) = body?;
    let id = s.mutate(|m| Ok(m.catalog_mut().provenance_mut().begin_workflow_execution(&req.workflow)?))?;
    Ok(created(execution_json(&id)))
}

async fn record_transformation(
    State(s): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<TransformationRecord>, JsonRejection>,
) -> ApiResult<impl IntoResponse> {
    let id = execution_id(&id);
    let Json(t) = body?;
    let dte = s.mutate(|m| {
        Ok(m.catalog_mut()
            .provenance_mut()
            .record_transformation_execution(&id, &t.name, &t.values)?)
    })?;
    Ok(created(json!({ "id": dte })))
}

async fn end_execution(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    let id = execution_id(&id);
    s.mutate(|m| Ok(m.catalog_mut().provenance_mut().end_workflow_execution(&id)?))?;
    Ok((StatusCode::OK, Json(json!({ "id": id, "ended": true }))))
}

/// Evaluates a query request against the mediator.
pub fn answer(m: &Mediator, req: &QueryRequest) -> Result<QueryResponse, Error> {
    let prepared = m.prepare(&req.text)?;
    if req.explain {
        let p = &prepared.plan;
        return Ok(QueryResponse {
            columns: p.output_columns.iter().map(|c| c.name.clone()).collect(),
            rows: Vec::new(),
            stats: QueryStats {
                build_ms: prepared.build_time.as_secs_f64() * 1000.0,
                exec_ms: 0.0,
                stores_touched: p.local_queries.len(),
                constant_table_rows: p.constant_table.rows.len(),
            },
            rendered_sql: Some(prepared.sql.clone()),
            plan: Some(PlanSummary { complexity: metrics::complexity_of_plan(p), plan: prepared.plan }),
        });
    }
    let out = m.execute(prepared)?;
    Ok(QueryResponse {
        columns: out.table.columns,
        rows: out.table.rows,
        stats: out.stats,
        rendered_sql: None,
        plan: None,
    })
}

async fn post_query(State(s): State<AppState>, body: Result<Json<QueryRequest>, JsonRejection>) -> ApiResult<Json<QueryResponse>> {
    let Json(req) = body?;
    let m = s.mediator.read().unwrap_or_else(|e| e.into_inner());
    Ok(Json(answer(&m, &req)?))
}

async fn health(State(s): State<AppState>) -> Json<Value> {
    let m = s.mediator.read().unwrap_or_else(|e| e.into_inner());
    let stores: Vec<&str> = m.adapters().names().collect();
    Json(json!({ "status": "ok", "nodes": m.catalog().node_count(), "links": m.catalog().link_count(), "stores": stores }))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/schema/gcs", post(post_gcs))
        .route("/schema/lcs", post(post_lcs))
        .route("/schema/alias", post(post_alias))
        .route("/provenance/workflows", post(post_workflow))
        .route("/provenance/executions", post(begin_execution))
        .route("/provenance/executions/{id}/transformations", post(record_transformation))
        .route("/provenance/executions/{id}/end", post(end_execution))
        .route("/query", post(post_query))
        .with_state(state)
}

/// Builds the mediator described by `config`: the persisted catalog if it
/// exists, then the fixture directory if given.
pub fn startup(config: &ServiceConfig) -> Result<Mediator, Error> {
    let mut m = match &config.catalog_path {
        Some(p) if p.exists() => Mediator::open(p)?,
        _ => Mediator::default(),
    };
    if let Some(dir) = &config.fixtures {
        m.ingest_dir(dir)?;
    }
    if let Some(p) = &config.catalog_path {
        m.save(p)?;
    }
    Ok(m)
}

pub async fn serve(config: ServiceConfig) -> Result<(), Error> {
    let mediator = startup(&config)?;
    let state = AppState::new(mediator, config.catalog_path.clone());
    let listener = tokio::net::TcpListener::bind(config.listen)
        .await
        .map_err(|e| Error::Io { path: config.listen.to_string(), message: e.to_string() })?;
    tracing::info!(address = %config.listen, "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| Error::Io { path: config.listen.to_string(), message: e.to_string() })
}

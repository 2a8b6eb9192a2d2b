//! JSON-over-HTTP API.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::{Arc, RwLock};

use anyhow::{Context, Result};
use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use plotsynth::session::{run_session, LemmaBank, SessionError, SessionOptions, SpecSource};
use plotsynth::synth::SynthConfig;
use plotsynth::table::{load_table, LoadOptions, Table};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::overrides::Overrides;
use crate::result_json;

#[derive(Clone, Debug)]
struct Dataset {
    name: String,
    table: Arc<Table>,
}

/// Datasets and lemma stores shared by all requests.
#[derive(Debug, Default)]
pub struct AppState {
    datasets: RwLock<BTreeMap<String, Dataset>>,
    lemmas: LemmaBank,
}

#[derive(Debug, Serialize)]
pub struct ColumnInfo {
    pub name: String,
    #[serde(rename = "type")]
    pub ctype: String,
}

#[derive(Debug, Serialize)]
pub struct DatasetInfo {
    pub id: String,
    pub name: String,
    pub rows: usize,
    pub columns: Vec<ColumnInfo>,
}

impl AppState {
    pub fn new() -> AppState {
        AppState::default()
    }

    /// Registers a table under its fingerprint and returns its summary.
    pub fn add(&self, name: &str, table: Table) -> DatasetInfo {
        let id = table.fingerprint();
        let info = info(&id, name, &table);
        let dataset = Dataset {
            name: name.to_string(),
            table: Arc::new(table),
        };
        self.datasets
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .insert(id, dataset);
        info
    }

    pub fn list(&self) -> Vec<DatasetInfo> {
        self.datasets
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .iter()
            .map(|(id, d)| info(id, &d.name, &d.table))
            .collect()
    }

    fn get(&self, id: &str) -> Option<Arc<Table>> {
        self.datasets
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
            .map(|d| d.table.clone())
    }

    /// Loads every `.csv` file in `dir`, named by file stem.
    pub fn load_dir(&self, dir: &Path) -> Result<usize> {
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .with_context(|| format!("reading {}", dir.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        paths.sort();
        for path in &paths {
            let bytes =
                std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
            let table = load_table(&bytes, &LoadOptions::default())
                .with_context(|| format!("loading {}", path.display()))?;
            let name = path.file_stem().unwrap_or_default().to_string_lossy();
            self.add(&name, table);
        }
        Ok(paths.len())
    }
}

fn info(id: &str, name: &str, t: &Table) -> DatasetInfo {
    DatasetInfo {
        id: id.to_string(),
        name: name.to_string(),
        rows: t.num_rows(),
        columns: t
            .columns()
            .iter()
            .map(|c| ColumnInfo {
                name: c.name.clone(),
                ctype: c.ctype.to_string(),
            })
            .collect(),
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl ToString) -> ApiError {
        ApiError {
            status,
            message: message.to_string(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({"error": self.message}))).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> ApiError {
        let status = match e {
            SessionError::Config(_) => StatusCode::UNPROCESSABLE_ENTITY,
            SessionError::Vega(_) => StatusCode::INTERNAL_SERVER_ERROR,
            SessionError::NoSpecs | SessionError::Spec(_) | SessionError::Table(_) => {
                StatusCode::BAD_REQUEST
            }
        };
        ApiError::new(status, e)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesizeRequest {
    pub dataset_id: String,
    pub query: Option<String>,
    /// A spec file document.
    pub specs: Option<serde_json::Value>,
    #[serde(default)]
    pub config: Overrides,
    #[serde(default)]
    pub deterministic: bool,
}

#[derive(Debug, Deserialize)]
struct UploadParams {
    name: Option<String>,
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/datasets", get(list_datasets).post(upload_dataset))
        .route("/synthesize", axum::routing::post(synthesize))
        .with_state(state)
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({"status": "ok", "version": env!("CARGO_PKG_VERSION")}))
}

async fn list_datasets(State(state): State<Arc<AppState>>) -> Json<Vec<DatasetInfo>> {
    Json(state.list())
}

async fn upload_dataset(
    State(state): State<Arc<AppState>>,
    Query(params): Query<UploadParams>,
    body: Bytes,
) -> Result<(StatusCode, Json<DatasetInfo>), ApiError> {
    let table = load_table(&body, &LoadOptions::default())
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e))?;
    let name = params.name.unwrap_or_else(|| "dataset".to_string());
    Ok((StatusCode::CREATED, Json(state.add(&name, table))))
}

async fn synthesize(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Response, ApiError> {
    let req: SynthesizeRequest =
        serde_json::from_slice(&body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e))?;
    let source = match (req.query, req.specs) {
        (Some(q), None) => SpecSource::Query(q),
        (None, Some(specs)) => SpecSource::SpecFile(specs.to_string()),
        _ => {
            return Err(ApiError::new(
                StatusCode::BAD_REQUEST,
                "give exactly one of `query` and `specs`",
            ))
        }
    };
    let table = state.get(&req.dataset_id).ok_or_else(|| {
        ApiError::new(
            StatusCode::NOT_FOUND,
            format!("unknown dataset `{}`", req.dataset_id),
        )
    })?;
    let config = req
        .config
        .apply(SynthConfig::default())
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e))?;
    let options = SessionOptions {
        config,
        deterministic: req.deterministic,
    };
    let result =
        tokio::task::spawn_blocking(move || run_session(&table, &source, &options, &state.lemmas))
            .await
            .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e))??;
    Ok((
        [(header::CONTENT_TYPE, "application/json")],
        result_json(&result),
    )
        .into_response())
}

pub async fn serve(host: &str, port: u16, state: Arc<AppState>) -> Result<()> {
    let listener = tokio::net::TcpListener::bind((host, port))
        .await
        .with_context(|| format!("binding {host}:{port}"))?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await?;
    Ok(())
}

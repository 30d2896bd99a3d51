//! HTTP API over the cost engine.
//!
//! Reports are immutable and stored as canonical JSON files named by the
//! SHA-256 of their contents. CSV and HTML renderings are derived from the
//! stored JSON on request.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use cloudcost::calendar::{MonthWindow, YearMonth};
use cloudcost::catalog::PriceScenario;
use cloudcost::finance::annualize;
use cloudcost::model::{parse_model_unchecked, Violation};
use cloudcost::report::{content_id, emit_csv, emit_html, emit_json, parse_json};
use cloudcost::{
    load_catalog, npv, simulate, validate, CatalogError, Decimal, ModelError, PriceCatalog,
    SimulationError,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub const ENV_ADDR: &str = "CLOUDCOST_ADDR";
pub const ENV_CATALOG_DIR: &str = "CLOUDCOST_CATALOG_DIR";
pub const ENV_REPORT_DIR: &str = "CLOUDCOST_REPORT_DIR";
pub const DEFAULT_ADDR: &str = "127.0.0.1:8080";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ServiceConfig {
    pub addr: SocketAddr,
    pub catalog_dir: Option<PathBuf>,
    pub report_dir: PathBuf,
}

impl ServiceConfig {
    /// Reads the listen address and directories from the environment.
    pub fn from_env() -> Result<Self, String> {
        let addr = std::env::var(ENV_ADDR).unwrap_or_else(|_| DEFAULT_ADDR.to_string());
        Ok(ServiceConfig {
            addr: addr
                .parse()
                .map_err(|e| format!("{ENV_ADDR}={addr}: {e}"))?,
            catalog_dir: std::env::var_os(ENV_CATALOG_DIR).map(PathBuf::from),
            report_dir: std::env::var_os(ENV_REPORT_DIR)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("reports")),
        })
    }
}

/// Uniform error body.
#[derive(Debug, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    status: StatusCode,
    code: &'static str,
    message: String,
    details: Value,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            details: Value::Null,
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "bad-request", message)
    }

    fn with_details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}

impl From<ModelError> for ApiError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Invalid(v) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid-model", "model violates structural rules")
                    .with_details(json!({ "violations": v }))
            }
            other => ApiError::bad_request(other.to_string()),
        }
    }
}

impl From<SimulationError> for ApiError {
    fn from(e: SimulationError) -> Self {
        match e {
            SimulationError::Model(m) => m.into(),
            SimulationError::Price(p) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "pricing-error", p.to_string())
            }
            other => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "simulation-error", other.to_string()),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CatalogInfo {
    pub label: String,
    pub as_of: String,
    pub entries: usize,
}

pub struct AppState {
    catalog_dir: Option<PathBuf>,
    report_dir: PathBuf,
    catalogs: RwLock<BTreeMap<String, Arc<PriceCatalog>>>,
    tmp_counter: AtomicU64,
}

/// Reads every `*.prices.json` file in `dir`, keyed by catalog label.
pub fn load_catalog_dir(dir: &Path) -> Result<BTreeMap<String, Arc<PriceCatalog>>, String> {
    let mut out = BTreeMap::new();
    let entries = std::fs::read_dir(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.to_string_lossy().ends_with(".prices.json"))
        .collect();
    paths.sort();
    for path in paths {
        let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        let catalog = load_catalog(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        if out.contains_key(&catalog.label) {
            return Err(format!("{}: duplicate catalog label {:?}", path.display(), catalog.label));
        }
        out.insert(catalog.label.clone(), Arc::new(catalog));
    }
    Ok(out)
}

impl AppState {
    pub fn new(config: &ServiceConfig) -> Result<Arc<Self>, String> {
        std::fs::create_dir_all(&config.report_dir)
            .map_err(|e| format!("{}: {e}", config.report_dir.display()))?;
        let catalogs = match &config.catalog_dir {
            Some(dir) => load_catalog_dir(dir)?,
            None => BTreeMap::new(),
        };
        Ok(Arc::new(AppState {
            catalog_dir: config.catalog_dir.clone(),
            report_dir: config.report_dir.clone(),
            catalogs: RwLock::new(catalogs),
            tmp_counter: AtomicU64::new(0),
        }))
    }

    fn catalog_list(&self) -> Vec<CatalogInfo> {
        self.catalogs
            .read()
            .expect("catalog lock")
            .values()
            .map(|c| CatalogInfo {
                label: c.label.clone(),
                as_of: c.as_of.to_string(),
                entries: c.entries().len(),
            })
            .collect()
    }

    fn report_path(&self, id: &str) -> PathBuf {
        self.report_dir.join(format!("{id}.json"))
    }

    /// Writes `bytes` under its content hash unless already present.
    fn store(&self, bytes: &[u8]) -> std::io::Result<String> {
        let id = content_id(bytes);
        let path = self.report_path(&id);
        if path.exists() {
            return Ok(id);
        }
        let n = self.tmp_counter.fetch_add(1, Ordering::Relaxed);
        let tmp = self
            .report_dir
            .join(format!(".{id}.{}.{n}.tmp", std::process::id()));
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, &path)?;
        Ok(id)
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/v1/validate", post(validate_model))
        .route("/v1/simulate", post(simulate_model))
        .route("/v1/reports/{id}", get(get_report))
        .route("/v1/catalogs", get(list_catalogs))
        .route("/v1/admin/reload", post(reload_catalogs))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not-found", "no such endpoint") })
        .with_state(state)
}

/// Binds and serves until interrupted.
pub async fn serve(config: ServiceConfig) -> Result<(), String> {
    let state = AppState::new(&config)?;
    let listener = tokio::net::TcpListener::bind(config.addr)
        .await
        .map_err(|e| format!("bind {}: {e}", config.addr))?;
    eprintln!("listening on {}", listener.local_addr().map_err(|e| e.to_string())?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| e.to_string())
}

fn json_body(body: &Bytes) -> Result<Value, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("body is not valid JSON: {e}")))
}

async fn validate_model(body: Bytes) -> Result<Json<Value>, ApiError> {
    let value = json_body(&body)?;
    let violations: Vec<Violation> = match parse_model_unchecked(&value.to_string()) {
        Ok(model) => validate(&model),
        Err(ModelError::DuplicateId(id)) => {
            return Ok(Json(json!({ "violations": [{ "element": id, "rule": "duplicate id", "detail": "" }] })))
        }
        Err(e) => return Err(e.into()),
    };
    Ok(Json(json!({ "violations": violations })))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WindowBody {
    from: YearMonth,
    to: YearMonth,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateBody {
    model: Value,
    #[serde(default)]
    catalog_ref: Option<String>,
    #[serde(default)]
    catalog: Option<Value>,
    window: WindowBody,
    #[serde(default)]
    scenario: Option<PriceScenario>,
    #[serde(default, with = "rust_decimal_opt")]
    discount_rate: Option<Decimal>,
}

/// Accepts the discount rate as a JSON number or string.
mod rust_decimal_opt {
    use cloudcost::Decimal;
    use serde::{Deserialize, Deserializer};

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Decimal>, D::Error> {
        let v = Option::<serde_json::Value>::deserialize(d)?;
        match v {
            None | Some(serde_json::Value::Null) => Ok(None),
            Some(serde_json::Value::String(s)) => s.parse().map(Some).map_err(serde::de::Error::custom),
            Some(serde_json::Value::Number(n)) => {
                n.to_string().parse::<Decimal>().map(Some).map_err(serde::de::Error::custom)
            }
            Some(other) => Err(serde::de::Error::custom(format!("invalid discount rate {other}"))),
        }
    }
}

async fn simulate_model(
    State(state): State<Arc<AppState>>,
    body: Bytes,
) -> Result<Json<Value>, ApiError> {
    let value = json_body(&body)?;
    let req: SimulateBody =
        serde_json::from_value(value).map_err(|e| ApiError::bad_request(format!("invalid request: {e}")))?;
    let window = MonthWindow::new(req.window.from, req.window.to)
        .map_err(|e| ApiError::bad_request(e.to_string()))?;
    let catalog = match (&req.catalog_ref, &req.catalog) {
        (Some(_), Some(_)) => {
            return Err(ApiError::bad_request("give either catalog_ref or catalog, not both"))
        }
        (None, None) => return Err(ApiError::bad_request("catalog_ref or catalog is required")),
        (Some(label), None) => state
            .catalogs
            .read()
            .expect("catalog lock")
            .get(label)
            .cloned()
            .ok_or_else(|| {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "catalog-not-found", "catalog not found")
                    .with_details(json!({ "catalog_ref": label }))
            })?,
        (None, Some(inline)) => Arc::new(load_catalog(&inline.to_string()).map_err(|e| match e {
            CatalogError::Syntax { .. } | CatalogError::Schema(_) => ApiError::bad_request(e.to_string()),
            other => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid-catalog", other.to_string()),
        })?),
    };
    if let Some(rate) = req.discount_rate {
        if rate <= -Decimal::ONE {
            return Err(ApiError::bad_request(format!("discount rate must exceed -1, got {rate}")));
        }
    }
    let model_text = req.model.to_string();
    let scenario = req.scenario;
    let rate = req.discount_rate;

    let json = tokio::task::spawn_blocking(move || -> Result<Vec<u8>, ApiError> {
        let model = parse_model_unchecked(&model_text)?;
        let violations = validate(&model);
        if !violations.is_empty() {
            return Err(ModelError::Invalid(violations).into());
        }
        let report = simulate(&model, &catalog, &window, scenario.as_ref())?;
        let npvs = match rate {
            Some(rate) => {
                let unprocessable =
                    |e: cloudcost::FinanceError| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "finance-error", e.to_string());
                let option = annualize(&report, window.start).map_err(unprocessable)?;
                vec![npv(&option, rate).map_err(unprocessable)?]
            }
            None => Vec::new(),
        };
        Ok(emit_json(&report, &npvs))
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;

    let id = state
        .store(&json)
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", format!("storing report: {e}")))?;
    let report: Value = serde_json::from_slice(&json).expect("emitted JSON parses");
    Ok(Json(json!({ "report_id": id, "report": report })))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
    Html,
}

/// Picks the first supported media type in the `Accept` header, JSON by default.
fn negotiate(headers: &HeaderMap) -> Option<Format> {
    let Some(accept) = headers.get(header::ACCEPT).and_then(|v| v.to_str().ok()) else {
        return Some(Format::Json);
    };
    let mut ranked: Vec<(f32, usize, &str)> = accept
        .split(',')
        .enumerate()
        .map(|(i, part)| {
            let mut bits = part.split(';');
            let media = bits.next().unwrap_or("").trim();
            let q = bits
                .filter_map(|p| p.trim().strip_prefix("q="))
                .find_map(|q| q.parse::<f32>().ok())
                .unwrap_or(1.0);
            (q, i, media)
        })
        .filter(|(q, _, _)| *q > 0.0)
        .collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    ranked.into_iter().find_map(|(_, _, media)| match media {
        "application/json" | "application/*" | "*/*" => Some(Format::Json),
        "text/csv" => Some(Format::Csv),
        "text/html" | "text/*" => Some(Format::Html),
        _ => None,
    })
}

fn is_report_id(id: &str) -> bool {
    id.len() == 64 && id.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
}

async fn get_report(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    let not_found = || ApiError::new(StatusCode::NOT_FOUND, "not-found", "report not found").with_details(json!({ "id": id }));
    if !is_report_id(&id) {
        return Err(not_found());
    }
    let bytes = match std::fs::read(state.report_path(&id)) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(not_found()),
        Err(e) => return Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string())),
    };
    let format = negotiate(&headers).ok_or_else(|| {
        ApiError::new(StatusCode::NOT_ACCEPTABLE, "not-acceptable", "supported types: application/json, text/csv, text/html")
    })?;
    let (content_type, body) = match format {
        Format::Json => ("application/json", bytes),
        other => {
            let (report, npvs) = parse_json(&bytes)
                .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", format!("stored report unreadable: {e}")))?;
            if other == Format::Csv {
                ("text/csv; charset=utf-8", emit_csv(&report))
            } else {
                ("text/html; charset=utf-8", emit_html(&report, &npvs, None))
            }
        }
    };
    Ok(([(header::CONTENT_TYPE, content_type)], body).into_response())
}

async fn list_catalogs(State(state): State<Arc<AppState>>) -> Json<Vec<CatalogInfo>> {
    Json(state.catalog_list())
}

async fn reload_catalogs(State(state): State<Arc<AppState>>) -> Result<Json<Vec<CatalogInfo>>, ApiError> {
    if let Some(dir) = &state.catalog_dir {
        let fresh = load_catalog_dir(dir)
            .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid-catalog", e))?;
        *state.catalogs.write().expect("catalog lock") = fresh;
    }
    Ok(Json(state.catalog_list()))
}

//! HTTP/JSON API over a directory of `.cmx` models.
//!
//! Models stay in `.cmx` form on disk; JSON exists only on the wire, where a
//! model is the list of its storage records. Saves use optimistic
//! versioning: a `PUT` must carry the version it was based on, and each
//! successful save bumps the version by one. Versions live in memory and
//! start at 1 for every file already present when first touched.

use std::collections::HashMap;
use std::future::Future;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, Request, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use conceptforge_core::xml::{model_to_records, records_to_model};
use conceptforge_core::{
    compile, parse_model, serialize_model, validate_model, CompileError, Diagnostic, Model, Target,
    XmlElementRecord,
};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::Mutex;
use tower_http::cors::{AllowOrigin, CorsLayer};

pub const MODEL_EXTENSION: &str = "cmx";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelEnvelope {
    #[serde(default)]
    pub name: String,
    pub version: u64,
    pub model: Vec<XmlElementRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub name: String,
    pub version: u64,
}

#[derive(Debug)]
pub enum ApiError {
    BadRequest(String),
    NotFound(String),
    Conflict { current: u64 },
    Unprocessable {
        message: String,
        diagnostics: Option<Vec<Diagnostic>>,
    },
    Internal(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match self {
            Self::BadRequest(m) => (StatusCode::BAD_REQUEST, json!({ "error": m })),
            Self::NotFound(name) => (
                StatusCode::NOT_FOUND,
                json!({ "error": format!("no model named {name:?}") }),
            ),
            Self::Conflict { current } => (
                StatusCode::CONFLICT,
                json!({ "error": "stale version", "version": current }),
            ),
            Self::Unprocessable {
                message,
                diagnostics,
            } => {
                let mut body = json!({ "error": message });
                if let Some(d) = diagnostics {
                    body["diagnostics"] = json!(d);
                }
                (StatusCode::UNPROCESSABLE_ENTITY, body)
            }
            Self::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, json!({ "error": m })),
        };
        (status, Json(body)).into_response()
    }
}

impl From<CompileError> for ApiError {
    fn from(e: CompileError) -> Self {
        let message = e.to_string();
        let diagnostics = match e {
            CompileError::Invalid(d) => Some(d),
            _ => None,
        };
        Self::Unprocessable {
            message,
            diagnostics,
        }
    }
}

/// Model names are file stems restricted to `[A-Za-z0-9_-]+`.
pub fn is_valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
}

/// The model directory plus the in-memory version of each model. Each
/// model's slot is locked for the whole read-compare-write of a save.
pub struct ModelStore {
    dir: PathBuf,
    slots: std::sync::Mutex<HashMap<String, Arc<Mutex<u64>>>>,
}

impl ModelStore {
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        if !dir.is_dir() {
            return Err(io::Error::new(
                io::ErrorKind::NotFound,
                format!("{} is not a directory", dir.display()),
            ));
        }
        Ok(Self {
            dir,
            slots: Default::default(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_of(&self, name: &str) -> PathBuf {
        self.dir.join(format!("{name}.{MODEL_EXTENSION}"))
    }

    /// Locks the model's slot; the guarded value is its current version
    /// (0 when the model does not exist yet).
    async fn lock(&self, name: &str) -> tokio::sync::OwnedMutexGuard<u64> {
        let slot = {
            let mut slots = self.slots.lock().unwrap_or_else(|p| p.into_inner());
            slots.entry(name.to_owned()).or_default().clone()
        };
        let mut guard = slot.lock_owned().await;
        if *guard == 0 && tokio::fs::try_exists(self.path_of(name)).await.unwrap_or(false) {
            *guard = 1;
        }
        guard
    }

    async fn read(&self, name: &str) -> Result<Option<String>, ApiError> {
        match tokio::fs::read_to_string(self.path_of(name)).await {
            Ok(text) => Ok(Some(text)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(ApiError::Internal(format!("reading {name}: {e}"))),
        }
    }

    async fn load(&self, name: &str) -> Result<Model, ApiError> {
        let text = self
            .read(name)
            .await?
            .ok_or_else(|| ApiError::NotFound(name.to_owned()))?;
        parse_model(&text).map_err(|e| ApiError::Unprocessable {
            message: format!("stored model {name} is unreadable: {e}"),
            diagnostics: None,
        })
    }

    async fn write(&self, name: &str, text: String) -> Result<(), ApiError> {
        let dir = self.dir.clone();
        let path = self.path_of(name);
        tokio::task::spawn_blocking(move || -> io::Result<()> {
            use std::io::Write as _;
            let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
            tmp.write_all(text.as_bytes())?;
            tmp.as_file().sync_all()?;
            tmp.persist(&path).map_err(|e| e.error)?;
            Ok(())
        })
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?
        .map_err(|e| ApiError::Internal(format!("writing {name}: {e}")))
    }
}

type Shared = Arc<ModelStore>;

fn check_name(name: &str) -> Result<(), ApiError> {
    if is_valid_name(name) {
        Ok(())
    } else {
        Err(ApiError::BadRequest(format!(
            "invalid model name {name:?} (allowed: letters, digits, '_' and '-')"
        )))
    }
}

fn parse_envelope(body: &[u8]) -> Result<(ModelEnvelope, Model), ApiError> {
    let envelope: ModelEnvelope = serde_json::from_slice(body)
        .map_err(|e| ApiError::BadRequest(format!("invalid model envelope: {e}")))?;
    let model = records_to_model(&envelope.model)
        .map_err(|e| ApiError::BadRequest(format!("invalid model: {e}")))?;
    Ok((envelope, model))
}

/// The model a preview request works on: the unsaved envelope in the body
/// if there is one, otherwise the stored model.
async fn preview_model(store: &ModelStore, name: &str, body: &[u8]) -> Result<Model, ApiError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        store.load(name).await
    } else {
        Ok(parse_envelope(body)?.1)
    }
}

async fn list_models(State(store): State<Shared>) -> Result<Json<Vec<ModelSummary>>, ApiError> {
    let mut names = Vec::new();
    let mut entries = tokio::fs::read_dir(store.dir())
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?;
    while let Some(entry) = entries
        .next_entry()
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?
    {
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) != Some(MODEL_EXTENSION) {
            continue;
        }
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            if is_valid_name(stem) {
                names.push(stem.to_owned());
            }
        }
    }
    names.sort();
    let mut out = Vec::with_capacity(names.len());
    for name in names {
        let version = *store.lock(&name).await;
        out.push(ModelSummary { name, version });
    }
    Ok(Json(out))
}

async fn get_model(
    State(store): State<Shared>,
    UrlPath(name): UrlPath<String>,
) -> Result<Json<ModelEnvelope>, ApiError> {
    check_name(&name)?;
    let version = store.lock(&name).await;
    let model = store.load(&name).await?;
    Ok(Json(ModelEnvelope {
        name,
        version: *version,
        model: model_to_records(&model),
    }))
}

async fn put_model(
    State(store): State<Shared>,
    UrlPath(name): UrlPath<String>,
    body: Bytes,
) -> Result<Json<serde_json::Value>, ApiError> {
    check_name(&name)?;
    let (envelope, model) = parse_envelope(&body)?;
    if !envelope.name.is_empty() && envelope.name != name {
        return Err(ApiError::BadRequest(format!(
            "envelope names {:?} but the URL names {name:?}",
            envelope.name
        )));
    }
    let mut version = store.lock(&name).await;
    if envelope.version != *version {
        return Err(ApiError::Conflict { current: *version });
    }
    store.write(&name, serialize_model(&model)).await?;
    *version += 1;
    Ok(Json(json!({ "version": *version })))
}

async fn validate(
    State(store): State<Shared>,
    UrlPath(name): UrlPath<String>,
    body: Bytes,
) -> Result<Json<Vec<Diagnostic>>, ApiError> {
    check_name(&name)?;
    let model = preview_model(&store, &name, &body).await?;
    Ok(Json(validate_model(&model)))
}

async fn compile_model(
    State(store): State<Shared>,
    UrlPath(name): UrlPath<String>,
    Query(params): Query<HashMap<String, String>>,
    body: Bytes,
) -> Result<Response, ApiError> {
    check_name(&name)?;
    let target: Target = params
        .get("target")
        .ok_or_else(|| ApiError::BadRequest("missing query parameter target".into()))?
        .parse()
        .map_err(ApiError::BadRequest)?;
    let model = preview_model(&store, &name, &body).await?;
    let text = compile(&model, target)?;
    Ok(([(header::CONTENT_TYPE, target.media_type())], text).into_response())
}

async fn log_request(req: Request, next: Next) -> Response {
    let method = req.method().clone();
    let uri = req.uri().clone();
    let start = Instant::now();
    let response = next.run(req).await;
    tracing::info!(
        "{method} {uri} {} {:.1}ms",
        response.status().as_u16(),
        start.elapsed().as_secs_f64() * 1e3
    );
    response
}

/// CORS policy: any origin unless one is given.
pub fn cors(origin: Option<HeaderValue>) -> CorsLayer {
    let layer = CorsLayer::new()
        .allow_methods([Method::GET, Method::PUT, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);
    match origin {
        Some(o) => layer.allow_origin(AllowOrigin::exact(o)),
        None => layer.allow_origin(AllowOrigin::any()),
    }
}

pub fn router(store: ModelStore) -> Router {
    router_with_cors(store, None)
}

pub fn router_with_cors(store: ModelStore, origin: Option<HeaderValue>) -> Router {
    Router::new()
        .route("/api/models", get(list_models))
        .route("/api/models/{name}", get(get_model).put(put_model))
        .route("/api/models/{name}/validate", post(validate))
        .route("/api/models/{name}/compile", post(compile_model))
        .layer(middleware::from_fn(log_request))
        .layer(cors(origin))
        .with_state(Arc::new(store))
}

/// Serves the API on `listener` until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    store: ModelStore,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> io::Result<()> {
    axum::serve(listener, router(store))
        .with_graceful_shutdown(shutdown)
        .await
}

//! REST lookup and editing service over a [`Store`].
//!
//! Routes:
//! - `GET /api/{dict}/{lang}/{criteria}/{string}[/{key}]?strategy&count&startIndex`
//! - `GET /api/{dict}/{lang}/entry/{id}` returns one entry with its revision as `ETag`
//! - `PUT /api/{dict}/{lang}/entry/{id}` replaces an entry (`If-Match: <revision>`)
//!   or, with an `m:link` body, creates a translation link
//! - `GET /api/{dict}/export[?lang=xxx]`

use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::extract::{Path as UrlPath, Query as UrlQuery, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use motamot_core::model::{
    Contributor, EntryId, LinkCase, LinkEnd, LinkOutcome, LinkRequest, QualityLevel,
};
use motamot_core::store::{KeyValue, Lookup, Query, Store, StoreError, Strategy, VolumeHandle};
use motamot_core::xml::{self, Document, Element, MOTAMOT_NS};
use serde::Deserialize;
use thiserror::Error;

pub const DEFAULT_PAGE_SIZE: usize = 10;

#[derive(Debug, Error)]
pub enum ServerError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Store(#[from] StoreError),
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct User {
    pub token: String,
    pub skill: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServerConfig {
    #[serde(default = "default_listen")]
    pub listen: SocketAddr,
    #[serde(default = "default_data_dir")]
    pub data_dir: PathBuf,
    #[serde(default = "default_page_size")]
    pub page_size: usize,
    /// Contributor name to token and skill.
    #[serde(default)]
    pub users: BTreeMap<String, User>,
}

fn default_listen() -> SocketAddr {
    SocketAddr::from(([127, 0, 0, 1], 8080))
}

fn default_data_dir() -> PathBuf {
    PathBuf::from("data")
}

fn default_page_size() -> usize {
    DEFAULT_PAGE_SIZE
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            listen: default_listen(),
            data_dir: default_data_dir(),
            page_size: DEFAULT_PAGE_SIZE,
            users: BTreeMap::new(),
        }
    }
}

impl ServerConfig {
    pub fn from_toml(text: &str) -> Result<Self, ServerError> {
        let config: ServerConfig =
            toml::from_str(text).map_err(|e| ServerError::Config(e.to_string()))?;
        if config.page_size == 0 {
            return Err(ServerError::Config("page_size must be at least 1".into()));
        }
        for (name, user) in &config.users {
            QualityLevel::new(user.skill)
                .map_err(|e| ServerError::Config(format!("user {name}: {e}")))?;
            if user.token.is_empty() {
                return Err(ServerError::Config(format!("user {name}: empty token")));
            }
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ServerError> {
        let text = std::fs::read_to_string(path).map_err(|source| ServerError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml(&text)
    }

    fn contributor_for(&self, token: &str) -> Option<Contributor> {
        self.users
            .iter()
            .find(|(_, u)| u.token == token)
            .and_then(|(name, u)| {
                QualityLevel::new(u.skill)
                    .ok()
                    .map(|s| Contributor::new(name, s))
            })
    }
}

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<Store>,
    pub config: Arc<ServerConfig>,
}

impl AppState {
    pub fn new(store: Arc<Store>, config: ServerConfig) -> Self {
        AppState {
            store,
            config: Arc::new(config),
        }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/{dict}/export", get(export))
        .route(
            "/api/{dict}/{lang}/entry/{id}",
            get(get_entry).put(put_entry),
        )
        .route("/api/{dict}/{lang}/{criteria}/{string}", get(lookup))
        .route(
            "/api/{dict}/{lang}/{criteria}/{string}/{key}",
            get(lookup_key),
        )
        .with_state(state)
}

/// Open the store in `config.data_dir` and serve until `shutdown` resolves.
pub async fn serve(
    config: ServerConfig,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> Result<(), ServerError> {
    let store = Arc::new(Store::open_dir(&config.data_dir)?);
    let listener = tokio::net::TcpListener::bind(config.listen)
        .await
        .map_err(|source| ServerError::Io {
            path: PathBuf::from(config.listen.to_string()),
            source,
        })?;
    tracing::info!(data = %config.data_dir.display(), "store opened");
    serve_listener(listener, AppState::new(store, config), shutdown).await
}

/// Serve on an already bound listener.
pub async fn serve_listener(
    listener: tokio::net::TcpListener,
    state: AppState,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> Result<(), ServerError> {
    if let Ok(addr) = listener.local_addr() {
        tracing::info!(address = %addr, "listening");
    }
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
        .map_err(|source| ServerError::Io {
            path: PathBuf::from("<listener>"),
            source,
        })
}

/// An error as sent to clients: a status and a one-line message.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
        }
    }
}

pub fn status_of(e: &StoreError) -> StatusCode {
    match e {
        StoreError::UnknownVolume(_)
        | StoreError::UnknownDictionary(_)
        | StoreError::NotFound(_) => StatusCode::NOT_FOUND,
        StoreError::UnknownCriteria(_)
        | StoreError::UnknownStrategy(_)
        | StoreError::InvalidInput(_) => StatusCode::BAD_REQUEST,
        StoreError::Conflict { .. } => StatusCode::CONFLICT,
        StoreError::Schema(_) | StoreError::Xml(_) | StoreError::DuplicateId(_) => {
            StatusCode::UNPROCESSABLE_ENTITY
        }
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let status = status_of(&e);
        if status == StatusCode::INTERNAL_SERVER_ERROR {
            tracing::error!(error = %e, "store failure");
        }
        ApiError::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Element::new("m:error")
            .with_attr("xmlns:m", MOTAMOT_NS)
            .with_attr("status", self.status.as_u16().to_string())
            .with_text(self.message);
        (self.status, xml_headers(), Document::new(body).to_xml()).into_response()
    }
}

fn xml_headers() -> [(header::HeaderName, HeaderValue); 1] {
    [(
        header::CONTENT_TYPE,
        HeaderValue::from_static("application/xml; charset=utf-8"),
    )]
}

fn xml_response(status: StatusCode, doc: String) -> Response {
    (status, xml_headers(), doc).into_response()
}

fn results_root(lookup: &Lookup, count: usize) -> Element {
    Element::new("m:results")
        .with_attr("xmlns:m", MOTAMOT_NS)
        .with_attr("total", lookup.total.to_string())
        .with_attr("start", lookup.start.to_string())
        .with_attr("count", count.to_string())
}

/// Body of a lookup without key: the matching entries, whole.
pub fn render_lookup(lookup: &Lookup) -> String {
    let mut root = results_root(lookup, lookup.hits.len());
    for hit in &lookup.hits {
        root.push(hit.entry.clone());
    }
    Document::new(root).to_xml()
}

/// Body of a lookup with a key: one `m:value` per value found.
pub fn render_values(lookup: &Lookup, values: &[KeyValue]) -> String {
    let mut root = results_root(lookup, lookup.hits.len());
    for v in values {
        root.push(
            Element::new("m:value")
                .with_attr("entry", v.entry.clone())
                .with_attr("key", v.key.clone())
                .with_text(v.value.clone()),
        );
    }
    Document::new(root).to_xml()
}

/// Read `strategy`, `count` and `startIndex`, rejecting anything else.
pub fn parse_query(
    criteria: &str,
    value: &str,
    params: &HashMap<String, String>,
    page_size: usize,
) -> Result<Query, ApiError> {
    let bad = |m: String| ApiError::new(StatusCode::BAD_REQUEST, m);
    let mut q = Query::new(criteria, value).window(0, page_size);
    for (k, v) in params {
        match k.as_str() {
            "strategy" => q.strategy = v.parse::<Strategy>().map_err(|e| bad(e.to_string()))?,
            "count" => {
                q.count =
                    v.parse().ok().filter(|&n: &usize| n >= 1).ok_or_else(|| {
                        bad(format!("count must be a positive integer, got {v:?}"))
                    })?
            }
            "startIndex" => {
                q.start = v.parse().map_err(|_| {
                    bad(format!(
                        "startIndex must be a non-negative integer, got {v:?}"
                    ))
                })?
            }
            other => return Err(bad(format!("unknown query parameter {other:?}"))),
        }
    }
    Ok(q)
}

async fn lookup(
    State(state): State<AppState>,
    UrlPath((dict, lang, criteria, string)): UrlPath<(String, String, String, String)>,
    UrlQuery(params): UrlQuery<HashMap<String, String>>,
) -> Result<Response, ApiError> {
    let q = parse_query(&criteria, &string, &params, state.config.page_size)?;
    let found = state.store.lookup(&dict, &lang, &q)?;
    if found.total == 0 {
        return Err(ApiError::new(
            StatusCode::NOT_FOUND,
            format!("no entry with {criteria} {string:?}"),
        ));
    }
    Ok(xml_response(StatusCode::OK, render_lookup(&found)))
}

async fn lookup_key(
    State(state): State<AppState>,
    UrlPath((dict, lang, criteria, string, key)): UrlPath<(String, String, String, String, String)>,
    UrlQuery(params): UrlQuery<HashMap<String, String>>,
) -> Result<Response, ApiError> {
    let q = parse_query(&criteria, &string, &params, state.config.page_size)?;
    let found = state.store.lookup(&dict, &lang, &q)?;
    if found.total == 0 {
        return Err(ApiError::new(
            StatusCode::NOT_FOUND,
            format!("no entry with {criteria} {string:?}"),
        ));
    }
    let values = state.store.project(&found, &key)?;
    Ok(xml_response(StatusCode::OK, render_values(&found, &values)))
}

fn entry_response(entry: &Element, status: StatusCode) -> Response {
    let revision = entry.attr("revision").unwrap_or("0").to_owned();
    let mut resp = xml_response(status, Document::new(entry.clone()).to_xml());
    if let Ok(v) = HeaderValue::from_str(&format!("\"{revision}\"")) {
        resp.headers_mut().insert(header::ETAG, v);
    }
    resp
}

async fn get_entry(
    State(state): State<AppState>,
    UrlPath((dict, lang, id)): UrlPath<(String, String, String)>,
) -> Result<Response, ApiError> {
    let entry = state.store.entry(&VolumeHandle::new(dict, lang), &id)?;
    Ok(entry_response(&entry, StatusCode::OK))
}

fn authenticate(state: &AppState, headers: &HeaderMap) -> Result<Contributor, ApiError> {
    let unauthorized =
        || ApiError::new(StatusCode::UNAUTHORIZED, "a valid bearer token is required");
    let token = headers
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .ok_or_else(unauthorized)?;
    state
        .config
        .contributor_for(token.trim())
        .ok_or_else(unauthorized)
}

fn expected_revision(headers: &HeaderMap) -> Result<u64, ApiError> {
    let raw = headers.get(header::IF_MATCH).ok_or_else(|| {
        ApiError::new(
            StatusCode::BAD_REQUEST,
            "If-Match with the expected revision is required",
        )
    })?;
    raw.to_str()
        .ok()
        .map(|v| v.trim().trim_start_matches("W/").trim_matches('"'))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| {
            ApiError::new(
                StatusCode::BAD_REQUEST,
                "If-Match must carry a revision number",
            )
        })
}

fn parse_entry_id(s: &str) -> Result<EntryId, ApiError> {
    s.parse().map_err(|e: motamot_core::model::ModelError| {
        ApiError::new(StatusCode::BAD_REQUEST, e.to_string())
    })
}

/// `<m:link [sense="s1"] target="khm.x.1.e" [target-sense="s2"] />`, sent to
/// the source entry.
pub fn parse_link(
    source: &str,
    body: &Element,
    creator: Contributor,
) -> Result<LinkRequest, ApiError> {
    let bad = |m: &str| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, m.to_owned());
    let target = body
        .attr("target")
        .ok_or_else(|| bad("m:link needs a target attribute"))?;
    let end = |id: &str, sense: Option<&str>| -> Result<LinkEnd, ApiError> {
        let id = parse_entry_id(id)?;
        Ok(match sense.filter(|s| !s.is_empty()) {
            Some(s) => LinkEnd::sense(id, s),
            None => LinkEnd::vocable(id),
        })
    };
    Ok(LinkRequest {
        source: end(source, body.attr("sense"))?,
        target: end(target, body.attr("target-sense"))?,
        creator,
    })
}

pub fn render_link(outcome: &LinkOutcome) -> String {
    let case = match outcome.case {
        LinkCase::Bijective => "bijective",
        LinkCase::DraftSense => "draft-sense",
        LinkCase::VocableNote => "vocable-note",
    };
    let mut root = Element::new("m:link-result")
        .with_attr("xmlns:m", MOTAMOT_NS)
        .with_attr("case", case);
    if let Some(a) = &outcome.axie {
        root.set_attr("axie", a.to_string());
    }
    if let Some(s) = &outcome.created_sense {
        root.set_attr("created-sense", s.clone());
    }
    for id in &outcome.modified {
        root.push(Element::new("m:modified").with_text(id.to_string()));
    }
    Document::new(root).to_xml()
}

async fn put_entry(
    State(state): State<AppState>,
    UrlPath((dict, lang, id)): UrlPath<(String, String, String)>,
    headers: HeaderMap,
    body: String,
) -> Result<Response, ApiError> {
    let contributor = authenticate(&state, &headers)?;
    let parsed = xml::parse(&body)
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?;
    let handle = VolumeHandle::new(&dict, &lang);
    if parsed.root.name == "m:link" {
        let source = parse_entry_id(&id)?;
        if source.lang() != lang {
            return Err(ApiError::new(
                StatusCode::BAD_REQUEST,
                format!("{id} is not in volume {handle}"),
            ));
        }
        let req = parse_link(&id, &parsed.root, contributor)?;
        let outcome = state.store.create_link(&dict, &req).map_err(|e| match e {
            StoreError::InvalidInput(m) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, m),
            other => other.into(),
        })?;
        return Ok(xml_response(StatusCode::OK, render_link(&outcome)));
    }
    let expected = expected_revision(&headers)?;
    state
        .store
        .update_entry(&handle, &id, &body, &contributor, expected)?;
    let entry = state.store.entry(&handle, &id)?;
    Ok(entry_response(&entry, StatusCode::OK))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExportParams {
    lang: Option<String>,
}

async fn export(
    State(state): State<AppState>,
    UrlPath(dict): UrlPath<String>,
    params: Result<UrlQuery<ExportParams>, axum::extract::rejection::QueryRejection>,
) -> Result<Response, ApiError> {
    let UrlQuery(params) =
        params.map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.body_text()))?;
    let body = match params.lang {
        Some(lang) => state
            .store
            .export_volume(&VolumeHandle::new(&dict, lang))
            .map_err(|e| match e {
                StoreError::UnknownVolume(v) => StoreError::UnknownDictionary(v),
                other => other,
            })?,
        None => state.store.export_dictionary(&dict)?,
    };
    let mut resp = xml_response(StatusCode::OK, body);
    let file = format!("attachment; filename=\"{dict}.xml\"");
    if let Ok(v) = HeaderValue::from_str(&file) {
        resp.headers_mut().insert(header::CONTENT_DISPOSITION, v);
    }
    Ok(resp)
}

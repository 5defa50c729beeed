use std::collections::HashMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{FromRequestParts, Path, Query, State};
use axum::http::request::Parts;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use isol_core::{
    export_result, histogram_series, summarize, AssessmentResult, ExportFormat, HistogramLevel, Mode,
    ScoreSheet,
};
use isol_store::{Experiment, Store, User};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::ApiError;

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<Store>,
}

type ApiResult<T> = Result<T, ApiError>;

/// Run a store call off the async workers; every mutation syncs to disk.
async fn blocking<T, F>(state: &AppState, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&Store) -> ApiResult<T> + Send + 'static,
{
    let store = state.store.clone();
    tokio::task::spawn_blocking(move || f(&store))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid JSON body: {e}")))
}

/// Caller identified by `Authorization: Bearer <token>`.
pub struct AuthUser(pub User);

impl FromRequestParts<AppState> for AuthUser {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &AppState) -> Result<Self, Self::Rejection> {
        let token = parts
            .headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .map(str::trim)
            .ok_or_else(ApiError::unauthorized)?;
        state
            .store
            .user_for_token(token)
            .map(AuthUser)
            .map_err(|_| ApiError::unauthorized())
    }
}

#[derive(Debug, Deserialize)]
struct Credentials {
    username: String,
    secret: String,
}

#[derive(Debug, Serialize)]
struct UserView {
    id: String,
    username: String,
    created_at: String,
}

impl From<&User> for UserView {
    fn from(u: &User) -> Self {
        Self {
            id: u.id.clone(),
            username: u.username.clone(),
            created_at: u.created_at.to_rfc3339(),
        }
    }
}

async fn create_user(State(state): State<AppState>, body: Bytes) -> ApiResult<(StatusCode, Json<serde_json::Value>)> {
    let creds: Credentials = parse_body(&body)?;
    let user = blocking(&state, move |s| Ok(s.register_user(&creds.username, &creds.secret)?)).await?;
    Ok((StatusCode::CREATED, Json(json!(UserView::from(&user)))))
}

async fn login(State(state): State<AppState>, body: Bytes) -> ApiResult<Json<serde_json::Value>> {
    let creds: Credentials = parse_body(&body)?;
    let token = blocking(&state, move |s| Ok(s.authenticate(&creds.username, &creds.secret)?)).await?;
    Ok(Json(json!({ "token": token })))
}

async fn list_taxonomies(State(state): State<AppState>) -> Json<serde_json::Value> {
    let items: Vec<_> = state
        .store
        .catalog()
        .iter()
        .map(|t| {
            json!({
                "id": t.id,
                "title": t.title,
                "version": t.version,
                "counts": t.counts(),
            })
        })
        .collect();
    Json(json!(items))
}

async fn get_taxonomy(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let t = state
        .store
        .catalog()
        .get(&id)
        .ok_or_else(|| ApiError::not_found("taxonomy", &id))?;
    Ok(Json(t.as_ref()).into_response())
}

#[derive(Debug, Deserialize)]
struct StartBody {
    taxonomy_id: String,
}

async fn start_experiment(
    State(state): State<AppState>,
    AuthUser(user): AuthUser,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<Experiment>)> {
    let req: StartBody = parse_body(&body)?;
    let e = blocking(&state, move |s| Ok(s.start_experiment(&user.id, &req.taxonomy_id)?)).await?;
    Ok((StatusCode::CREATED, Json(e)))
}

fn owned_experiment(store: &Store, user: &User, id: &str) -> ApiResult<Experiment> {
    let e = store.experiment(id)?;
    if e.user_id != user.id {
        return Err(ApiError::not_found("experiment", id));
    }
    Ok(e)
}

async fn get_experiment(
    State(state): State<AppState>,
    AuthUser(user): AuthUser,
    Path(id): Path<String>,
) -> ApiResult<Json<Experiment>> {
    Ok(Json(owned_experiment(&state.store, &user, &id)?))
}

#[derive(Debug, Deserialize)]
struct ScoresBody {
    entries: ScoreSheet,
}

async fn put_scores(
    State(state): State<AppState>,
    AuthUser(user): AuthUser,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<Experiment>> {
    let req: ScoresBody = parse_body(&body)?;
    let e = blocking(&state, move |s| {
        owned_experiment(s, &user, &id)?;
        Ok(s.record_scores(&id, &req.entries)?)
    })
    .await?;
    Ok(Json(e))
}

#[derive(Debug, Default, Deserialize)]
struct FinalizeBody {
    #[serde(default)]
    mode: Mode,
}

async fn finalize(
    State(state): State<AppState>,
    AuthUser(user): AuthUser,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<AssessmentResult>> {
    let req: FinalizeBody = if body.iter().all(u8::is_ascii_whitespace) {
        FinalizeBody::default()
    } else {
        parse_body(&body)?
    };
    let r = blocking(&state, move |s| {
        owned_experiment(s, &user, &id)?;
        Ok(s.finalize_experiment(&id, req.mode)?)
    })
    .await?;
    Ok(Json(r))
}

fn query_param<T: std::str::FromStr<Err = String>>(
    q: &HashMap<String, String>,
    key: &str,
    default: T,
) -> ApiResult<T> {
    match q.get(key) {
        None => Ok(default),
        Some(v) => v.parse().map_err(ApiError::bad_request),
    }
}

/// Stored result when finalized, otherwise a live evaluation of the sheet so
/// far (partial unless `mode=strict` is asked for).
fn result_for(store: &Store, user: &User, id: &str, q: &HashMap<String, String>) -> ApiResult<(AssessmentResult, bool)> {
    let e = owned_experiment(store, user, id)?;
    match e.result {
        Some(r) => Ok((r, false)),
        None => {
            let mode = query_param(q, "mode", Mode::Partial)?;
            Ok((store.preview(id, mode)?, true))
        }
    }
}

async fn report(
    State(state): State<AppState>,
    AuthUser(user): AuthUser,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Response> {
    let view = q.get("view").map(String::as_str).unwrap_or("summary");
    let level = query_param(&q, "level", HistogramLevel::Domain)?;
    let (result, preview) = result_for(&state.store, &user, &id, &q)?;
    let body = match view {
        "summary" => json!({ "experiment_id": id, "preview": preview, "summary": summarize(&result) }),
        "histogram" => json!({
            "experiment_id": id,
            "preview": preview,
            "histogram": histogram_series(&result, level),
        }),
        "result" => json!({ "experiment_id": id, "preview": preview, "result": result }),
        other => {
            return Err(ApiError::bad_request(format!(
                "unknown view `{other}` (expected summary, histogram or result)"
            )))
        }
    };
    Ok(Json(body).into_response())
}

async fn export(
    State(state): State<AppState>,
    AuthUser(user): AuthUser,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Response> {
    let format = query_param(&q, "format", ExportFormat::Json)?;
    let e = owned_experiment(&state.store, &user, &id)?;
    let result = e
        .result
        .ok_or_else(|| ApiError::new(StatusCode::CONFLICT, "IncompleteAssessment", "experiment is not finalized"))?;
    let (mime, ext) = match format {
        ExportFormat::Json => ("application/json", "json"),
        ExportFormat::Csv => ("text/csv; charset=utf-8", "csv"),
    };
    Ok((
        [
            (header::CONTENT_TYPE, mime.to_string()),
            (
                header::CONTENT_DISPOSITION,
                format!("attachment; filename=\"{id}.{ext}\""),
            ),
        ],
        export_result(&result, format),
    )
        .into_response())
}

async fn history(
    State(state): State<AppState>,
    AuthUser(user): AuthUser,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Response> {
    let taxonomy = q.get("taxonomy").map(String::as_str).unwrap_or(isol_core::ISO27001_ID);
    Ok(Json(state.store.history(&user.id, taxonomy)).into_response())
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "NotFound", "no such endpoint")
}

pub fn api_router(state: AppState) -> Router {
    Router::new()
        .route("/api/users", post(create_user))
        .route("/api/login", post(login))
        .route("/api/users/me/history", get(history))
        .route("/api/taxonomies", get(list_taxonomies))
        .route("/api/taxonomies/{id}", get(get_taxonomy))
        .route("/api/experiments", post(start_experiment))
        .route("/api/experiments/{id}", get(get_experiment))
        .route("/api/experiments/{id}/scores", put(put_scores))
        .route("/api/experiments/{id}/finalize", post(finalize))
        .route("/api/experiments/{id}/report", get(report))
        .route("/api/experiments/{id}/export", get(export))
        .route("/api/{*rest}", axum::routing::any(not_found))
        .with_state(state)
}

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Multipart, Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Deserialize;
use serde_json::{json, Value};
use ssn_core::pipeline::{Dataset, PipelineError};
use ssn_core::{MeasureId, MixerId, Namespace, OntologyError, ThresholdConfig};

use crate::error::ApiError;
use crate::store::{short_hash, DatasetRecord, JobParams, JobRecord, JobState, RunSummary, Store};
use crate::worker::{artifact, Queue};

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<Store>,
    pub queue: Queue,
}

const CSV: &str = "text/csv";
const JSON: &str = "application/json";
const TSV: &str = "text/tab-separated-values";

pub async fn upload_dataset(
    State(state): State<AppState>,
    mut form: Multipart,
) -> Result<Response, ApiError> {
    let (mut obo, mut gaf, mut organism) = (None, None, String::new());
    while let Some(field) = form
        .next_field()
        .await
        .map_err(|e| ApiError::bad_request("malformed_upload", e.to_string()))?
    {
        let name = field.name().unwrap_or_default().to_string();
        let bytes = field
            .bytes()
            .await
            .map_err(|e| ApiError::bad_request("malformed_upload", e.to_string()))?;
        match name.as_str() {
            "obo" => obo = Some(bytes),
            "gaf" => gaf = Some(bytes),
            "organism" => {
                organism = String::from_utf8(bytes.to_vec())
                    .map_err(|_| ApiError::bad_request("malformed_upload", "organism is not UTF-8"))?
                    .trim()
                    .to_string()
            }
            _ => {}
        }
    }
    let missing: Vec<&str> = [("obo", obo.is_none()), ("gaf", gaf.is_none())]
        .into_iter()
        .filter_map(|(n, m)| m.then_some(n))
        .collect();
    let (Some(obo), Some(gaf)) = (obo, gaf) else {
        return Err(ApiError::bad_request(
            "missing_part",
            format!("multipart upload lacks {}", missing.join(" and ")),
        )
        .with_details(json!({ "missing": missing })));
    };

    let (obo_c, gaf_c, org_c) = (obo.clone(), gaf.clone(), organism.clone());
    let parsed = tokio::task::spawn_blocking(move || {
        Dataset::load(&obo_c[..], &gaf_c[..], Some(org_c.as_str()).filter(|o| !o.is_empty()))
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))?;
    let data = parsed.map_err(|e| {
        ApiError::bad_request("invalid_dataset", e.to_string())
            .with_details(json!({ "kind": error_kind(&e), "message": e.to_string() }))
    })?;
    if data.corpora.is_empty() {
        return Err(ApiError::bad_request(
            "invalid_dataset",
            "no usable annotations for any namespace",
        )
        .with_details(json!({ "kind": "EmptyCorpus", "diagnostics": data.diagnostics })));
    }

    let record = DatasetRecord {
        id: format!("ds-{}", short_hash(&[&obo, &gaf, organism.as_bytes()])),
        organism,
        ontology_ref: "ontology.obo".into(),
        annotation_ref: "annotations.gaf".into(),
        created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        namespaces: data.namespaces(),
        diagnostics: data.diagnostics,
    };
    let (record, created) = state.store.insert_dataset(record, &obo, &gaf)?;
    let status = if created { StatusCode::CREATED } else { StatusCode::OK };
    Ok((status, Json(record)).into_response())
}

/// Variant name of a load failure, reported to clients as `details.kind`.
fn error_kind(e: &PipelineError) -> &'static str {
    use ssn_core::AnnotationError as A;
    match e {
        PipelineError::Ontology(o) => match o {
            OntologyError::MalformedStanza { .. } => "MalformedStanza",
            OntologyError::CycleDetected(_) => "CycleDetected",
            OntologyError::DanglingReference { .. } => "DanglingReference",
            OntologyError::UnknownTerm(_) => "UnknownTerm",
            OntologyError::NamespaceMismatch(..) => "NamespaceMismatch",
            OntologyError::InvalidTermId(_) => "InvalidTermId",
            OntologyError::Io(_) => "Io",
        },
        PipelineError::Annotations(a) => match a {
            A::MalformedLine { .. } => "MalformedLine",
            A::EmptyCorpus => "EmptyCorpus",
            A::UnknownIC(_) => "UnknownIC",
            A::Io(_) => "Io",
        },
        PipelineError::EmptyNamespace(_) => "EmptyNamespace",
        _ => "Other",
    }
}

pub async fn get_dataset(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<DatasetRecord>, ApiError> {
    state
        .store
        .dataset(&id)
        .map(Json)
        .ok_or_else(|| ApiError::not_found(format!("unknown dataset {id}")))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AnalysisRequest {
    dataset_id: String,
    namespace: Option<String>,
    measure: Option<String>,
    mixer: Option<String>,
    threshold_config: Option<Value>,
    seed: Option<u64>,
}

pub async fn create_analysis(
    State(state): State<AppState>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let req: AnalysisRequest = serde_json::from_slice(&body)
        .map_err(|e| ApiError::bad_request("malformed_request", e.to_string()))?;
    let dataset = state
        .store
        .dataset(&req.dataset_id)
        .ok_or_else(|| ApiError::not_found(format!("unknown dataset {}", req.dataset_id)))?;
    let params = validate(req, &dataset)?;
    let id = params.job_id();
    let job = JobRecord {
        id: id.clone(),
        params,
        state: JobState::Queued,
        error: None,
        runs: Vec::new(),
        skipped: Vec::new(),
    };
    let (job, created) = state.store.insert_job(job)?;
    if created && !state.queue.try_push(id.clone()) {
        state.store.remove_job(&id)?;
        return Err(ApiError::new(
            StatusCode::SERVICE_UNAVAILABLE,
            "queue_full",
            "the job queue is full, retry later",
        ));
    }
    let location = HeaderValue::from_str(&format!("/analyses/{id}")).expect("ascii id");
    Ok((StatusCode::ACCEPTED, [(header::LOCATION, location)], Json(job)).into_response())
}

fn validate(req: AnalysisRequest, dataset: &DatasetRecord) -> Result<JobParams, ApiError> {
    let namespace = match req.namespace.as_deref() {
        None => Namespace::BiologicalProcess.code().to_string(),
        Some(n) if n.eq_ignore_ascii_case("all") => "ALL".to_string(),
        Some(n) => {
            let ns: Namespace = n.parse().map_err(ApiError::unprocessable)?;
            if !dataset.namespaces.contains(&ns) {
                return Err(ApiError::unprocessable(format!(
                    "dataset {} has no annotations in namespace {ns}",
                    dataset.id
                )));
            }
            ns.code().to_string()
        }
    };
    let measure = match req.measure.as_deref() {
        None => MeasureId::DEFAULT.name().to_string(),
        Some(m) if m.eq_ignore_ascii_case("all") => "ALL".to_string(),
        Some(m) => m.parse::<MeasureId>().map_err(ApiError::unprocessable)?.name().to_string(),
    };
    let mixer = match req.mixer.as_deref() {
        None => MixerId::default(),
        Some(m) => m.parse().map_err(ApiError::unprocessable)?,
    };
    let threshold_config: ThresholdConfig = match req.threshold_config {
        None => ThresholdConfig::default(),
        Some(v) => serde_json::from_value(v).map_err(|e| ApiError::unprocessable(e.to_string()))?,
    };
    threshold_config
        .validate()
        .map_err(|e| ApiError::unprocessable(e.to_string()))?;
    Ok(JobParams {
        dataset_id: dataset.id.clone(),
        namespace,
        measure,
        mixer,
        threshold_config,
        seed: req.seed.unwrap_or(ssn_core::DEFAULT_SEED),
    })
}

pub async fn get_analysis(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<JobRecord>, ApiError> {
    state
        .store
        .job(&id)
        .map(Json)
        .ok_or_else(|| ApiError::not_found(format!("unknown analysis {id}")))
}

#[derive(Deserialize, Default)]
pub struct ArtifactQuery {
    format: Option<String>,
    namespace: Option<String>,
    measure: Option<String>,
    kind: Option<String>,
    on: Option<String>,
}

/// The run directory of a finished job selected by the query.
fn locate(store: &Store, id: &str, q: &ArtifactQuery) -> Result<(PathBuf, RunSummary), ApiError> {
    let job = store
        .job(id)
        .ok_or_else(|| ApiError::not_found(format!("unknown analysis {id}")))?;
    if job.state != JobState::Done {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            "job_not_done",
            format!("analysis {id} is {:?}", job.state).to_lowercase(),
        )
        .with_details(json!({ "state": job.state, "error": job.error })));
    }
    let namespace: Option<Namespace> = match &q.namespace {
        Some(n) => Some(n.parse().map_err(|e: String| ApiError::bad_request("bad_query", e))?),
        None => None,
    };
    let measure: Option<MeasureId> = match &q.measure {
        Some(m) => Some(m.parse().map_err(|e: String| ApiError::bad_request("bad_query", e))?),
        None => None,
    };
    let matching: Vec<&RunSummary> = job
        .runs
        .iter()
        .filter(|r| namespace.is_none_or(|n| n == r.namespace) && measure.is_none_or(|m| m == r.measure))
        .collect();
    match matching.as_slice() {
        [run] => Ok((store.job_dir(id).join(&run.key), (*run).clone())),
        [] => Err(ApiError::not_found("no run of this analysis matches namespace and measure")),
        many => Err(ApiError::bad_request(
            "ambiguous_run",
            "this analysis has several runs; select one with namespace and measure",
        )
        .with_details(json!({ "runs": many.iter().map(|r| &r.key).collect::<Vec<_>>() }))),
    }
}

/// Picks the representation: `format` query first, then the Accept header,
/// then the first offer.
fn negotiate<'a>(
    q: &ArtifactQuery,
    headers: &HeaderMap,
    offers: &[(&'a str, &'a str)],
) -> Result<(&'a str, &'a str), ApiError> {
    let unsupported = |what: &str| {
        ApiError::new(
            StatusCode::NOT_ACCEPTABLE,
            "not_acceptable",
            format!("cannot produce {what}"),
        )
        .with_details(json!({ "formats": offers.iter().map(|o| o.0).collect::<Vec<_>>() }))
    };
    if let Some(f) = &q.format {
        return offers
            .iter()
            .find(|o| o.0.eq_ignore_ascii_case(f))
            .copied()
            .ok_or_else(|| unsupported(f));
    }
    let Some(accept) = headers.get(header::ACCEPT).and_then(|v| v.to_str().ok()) else {
        return Ok(offers[0]);
    };
    let mut ranges: Vec<(f32, &str)> = accept
        .split(',')
        .map(|part| {
            let mut pieces = part.split(';');
            let media = pieces.next().unwrap_or("").trim();
            let q = pieces
                .filter_map(|p| p.trim().strip_prefix("q="))
                .find_map(|v| v.parse::<f32>().ok())
                .unwrap_or(1.0);
            (q, media)
        })
        .filter(|(q, _)| *q > 0.0)
        .collect();
    ranges.sort_by(|a, b| b.0.total_cmp(&a.0));
    for (_, media) in &ranges {
        if *media == "*/*" || *media == "text/*" && offers[0].1.starts_with("text/") {
            return Ok(offers[0]);
        }
        if let Some(o) = offers.iter().find(|o| o.1.eq_ignore_ascii_case(media)) {
            return Ok(*o);
        }
        if *media == "text/*" {
            if let Some(o) = offers.iter().find(|o| o.1.starts_with("text/")) {
                return Ok(*o);
            }
        }
    }
    Err(unsupported(accept))
}

fn file_response(path: PathBuf, mime: &str, extra: Option<(&'static str, String)>) -> Result<Response, ApiError> {
    let bytes = std::fs::read(&path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            ApiError::not_found("artifact not available for this run")
        } else {
            e.into()
        }
    })?;
    let mut response = ([(header::CONTENT_TYPE, HeaderValue::from_str(mime).expect("mime"))], bytes).into_response();
    if let Some((name, value)) = extra {
        response
            .headers_mut()
            .insert(name, HeaderValue::from_str(&value).expect("header value"));
    }
    Ok(response)
}

pub async fn get_matrix(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<ArtifactQuery>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    let (dir, _) = locate(&state.store, &id, &q)?;
    let (format, mime) = negotiate(&q, &headers, &[("csv", CSV), ("json", JSON)])?;
    let name = if format == "csv" { artifact::MATRIX_CSV } else { artifact::MATRIX_JSON };
    file_response(dir.join(name), mime, None)
}

/// Header carrying whether pruning reached a nearly disconnected network.
pub const CONVERGED_HEADER: &str = "x-ssn-converged";

pub async fn get_network(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<ArtifactQuery>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    let (dir, run) = locate(&state.store, &id, &q)?;
    let pruned = match q.kind.as_deref().unwrap_or("pruned") {
        "raw" => false,
        "pruned" => true,
        other => {
            return Err(ApiError::bad_request(
                "bad_query",
                format!("kind must be raw or pruned, not {other:?}"),
            ))
        }
    };
    let (format, mime) = negotiate(&q, &headers, &[("json", JSON), ("tsv", TSV)])?;
    let name = match (pruned, format) {
        (false, "json") => artifact::RAW_JSON,
        (false, _) => artifact::RAW_TSV,
        (true, "json") => artifact::PRUNED_JSON,
        (true, _) => artifact::PRUNED_TSV,
    };
    let flag = pruned.then(|| (CONVERGED_HEADER, run.converged.to_string()));
    file_response(dir.join(name), mime, flag)
}

pub async fn get_spectra(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<ArtifactQuery>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    let (dir, run) = locate(&state.store, &id, &q)?;
    let (_, mime) = negotiate(&q, &headers, &[("json", JSON)])?;
    file_response(
        dir.join(artifact::SPECTRA),
        mime,
        Some((CONVERGED_HEADER, run.converged.to_string())),
    )
}

pub async fn get_communities(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<ArtifactQuery>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    let (dir, _) = locate(&state.store, &id, &q)?;
    let pruned = match q.on.as_deref().unwrap_or("pruned") {
        "raw" => false,
        "pruned" => true,
        other => {
            return Err(ApiError::bad_request(
                "bad_query",
                format!("on must be raw or pruned, not {other:?}"),
            ))
        }
    };
    let (format, mime) = negotiate(&q, &headers, &[("json", JSON), ("csv", CSV)])?;
    let name = match (pruned, format) {
        (false, "json") => artifact::RAW_COMMUNITIES_JSON,
        (false, _) => artifact::RAW_COMMUNITIES_CSV,
        (true, "json") => artifact::PRUNED_COMMUNITIES_JSON,
        (true, _) => artifact::PRUNED_COMMUNITIES_CSV,
    };
    file_response(dir.join(name), mime, None)
}

pub async fn fallback() -> ApiError {
    ApiError::not_found("no such route")
}

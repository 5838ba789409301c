//! CI job entry points: analyze and push, replay span fixtures, update the
//! change request link.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::agent::{analyze_tree, emit_snapshot_document, AgentError, DEFAULT_GLOB};
use crate::model::{is_commit_hash, validate_application, CommitRef};
use crate::service::{build_deep_link, upsert_cr_link, GhsConfig, ServiceError};
use crate::trace::SpansDocument;

pub const DEFAULT_API_URL: &str = "http://127.0.0.1:8080";
pub const DEFAULT_BRANCH: &str = "HEAD";
pub const DEFAULT_TOKEN_ENV: &str = "CODECITY_GHS_TOKEN";
pub const REPLAY_BATCH: usize = 1000;

#[derive(Debug, Error)]
pub enum JobError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Analysis(AgentError),
    #[error("malformed fixture: {0}")]
    Fixture(String),
    #[error("push failed: {0}")]
    Push(String),
    #[error(transparent)]
    Link(ServiceError),
}

impl JobError {
    pub fn exit_code(&self) -> i32 {
        match self {
            JobError::Usage(_) => 2,
            JobError::Io { .. } => 3,
            JobError::Analysis(AgentError::Io { .. }) => 3,
            JobError::Analysis(_) => 4,
            JobError::Fixture(_) => 4,
            JobError::Push(_) => 5,
            JobError::Link(ServiceError::Config(_)) => 2,
            JobError::Link(ServiceError::Credentials(_)) => 6,
            JobError::Link(ServiceError::NotFound(_)) => 7,
            JobError::Link(_) => 8,
        }
    }
}

/// Exit status for a finished job.
pub fn exit_code<T>(r: &Result<T, JobError>) -> i32 {
    r.as_ref().err().map_or(0, JobError::exit_code)
}

/// The process environment, for [`CiContext::resolve`] and friends.
pub fn process_env(key: &str) -> Option<String> {
    std::env::var(key).ok().filter(|v| !v.is_empty())
}

#[derive(Debug, Clone, Default)]
pub struct CiFlags {
    pub application: String,
    pub commit: Option<String>,
    pub branch: Option<String>,
    pub api_url: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CiContext {
    pub commit: String,
    pub branch: String,
    pub application: String,
    pub api_url: String,
}

impl CiContext {
    /// Flags win over `CI_COMMIT_SHA`, `CI_COMMIT_BRANCH` and
    /// `CODECITY_API_URL`.
    pub fn resolve(flags: &CiFlags, env: impl Fn(&str) -> Option<String>) -> Result<Self, JobError> {
        validate_application(&flags.application).map_err(|e| JobError::Usage(e.to_string()))?;
        let commit = flags
            .commit
            .clone()
            .or_else(|| env("CI_COMMIT_SHA"))
            .ok_or_else(|| JobError::Usage("no commit: pass --commit or set CI_COMMIT_SHA".into()))?;
        if !is_commit_hash(&commit) {
            return Err(JobError::Usage(format!("commit {commit:?} is not a 40 character lowercase hex hash")));
        }
        let api_url = flags.api_url.clone().or_else(|| env("CODECITY_API_URL")).unwrap_or_else(|| DEFAULT_API_URL.to_string());
        url::Url::parse(&api_url).map_err(|e| JobError::Usage(format!("api url {api_url:?}: {e}")))?;
        Ok(CiContext {
            commit,
            branch: flags.branch.clone().or_else(|| env("CI_COMMIT_BRANCH")).unwrap_or_else(|| DEFAULT_BRANCH.to_string()),
            application: flags.application.clone(),
            api_url: api_url.trim_end_matches('/').to_string(),
        })
    }

    pub fn commit_ref(&self) -> Result<CommitRef, JobError> {
        CommitRef::new(&self.application, &self.branch, &self.commit, None).map_err(|e| JobError::Usage(e.to_string()))
    }
}

async fn post(client: &reqwest::Client, url: &str, body: Vec<u8>) -> Result<reqwest::Response, JobError> {
    let resp = client
        .post(url)
        .header(reqwest::header::CONTENT_TYPE, "application/json")
        .body(body)
        .send()
        .await
        .map_err(|e| JobError::Push(format!("{url}: {e}")))?;
    if !resp.status().is_success() {
        let status = resp.status();
        let text = resp.text().await.unwrap_or_default();
        return Err(JobError::Push(format!("{url} answered {status}: {text}")));
    }
    Ok(resp)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalyzeReport {
    pub commit_ref: CommitRef,
    pub classes: usize,
    pub methods: usize,
    pub warnings: usize,
}

/// Analyzes `root`, emits the structure document and posts it.
pub async fn run_analyze_job(client: &reqwest::Client, ctx: &CiContext, root: &Path) -> Result<AnalyzeReport, JobError> {
    let commit_ref = ctx.commit_ref()?;
    let root = root.to_path_buf();
    let analysis = tokio::task::spawn_blocking(move || analyze_tree(&root, &[DEFAULT_GLOB.to_string()], commit_ref))
        .await
        .map_err(|e| JobError::Usage(format!("analysis worker failed: {e}")))?
        .map_err(JobError::Analysis)?;
    let s = &analysis.snapshot;
    for w in &s.warnings {
        log::warn!("{}: {}", w.path, w.reason);
    }
    post(client, &format!("{}/api/v1/structure", ctx.api_url), emit_snapshot_document(s)).await?;
    Ok(AnalyzeReport {
        commit_ref: s.commit_ref.clone(),
        classes: s.class_count(),
        methods: s.method_count(),
        warnings: s.warnings.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayReport {
    pub spans: usize,
    pub batches: usize,
    pub inserted: usize,
}

/// Stamps a fixture with the job's application and commit and stretches
/// its timeline by `time_scale` around the earliest span start.
pub fn prepare_replay(ctx: &CiContext, fixture: &[u8], time_scale: f64) -> Result<SpansDocument, JobError> {
    if !(time_scale.is_finite() && time_scale > 0.0) {
        return Err(JobError::Usage(format!("time scale must be positive, got {time_scale}")));
    }
    let mut doc = SpansDocument::parse(fixture).map_err(|e| JobError::Fixture(e.to_string()))?;
    doc.application = Some(ctx.application.clone());
    doc.commit = Some(ctx.commit.clone());
    if let Some(origin) = doc.spans.iter().map(|s| s.start_ns).min() {
        let scale = |t: i64| origin + ((t - origin) as f64 * time_scale).round() as i64;
        for s in &mut doc.spans {
            s.start_ns = scale(s.start_ns);
            s.end_ns = scale(s.end_ns);
        }
    }
    let records = doc.clone().into_records().map_err(|e| JobError::Fixture(e.to_string()))?;
    if let Some((i, reason)) = records.iter().enumerate().find_map(|(i, r)| r.validate().err().map(|e| (i, e))) {
        return Err(JobError::Fixture(format!("span {i}: {reason}")));
    }
    Ok(doc)
}

/// Replays a span fixture against the ingest endpoint in batches.
pub async fn run_trace_replay(
    client: &reqwest::Client,
    ctx: &CiContext,
    fixture: &Path,
    time_scale: f64,
) -> Result<ReplayReport, JobError> {
    let bytes = std::fs::read(fixture).map_err(|source| JobError::Io { path: fixture.to_path_buf(), source })?;
    let doc = prepare_replay(ctx, &bytes, time_scale)?;
    let url = format!("{}/api/v1/spans", ctx.api_url);
    let mut report = ReplayReport { spans: doc.spans.len(), batches: 0, inserted: 0 };
    for chunk in doc.spans.chunks(REPLAY_BATCH) {
        let batch = SpansDocument { spans: chunk.to_vec(), ..doc.clone() };
        let resp = post(client, &url, serde_json::to_vec(&batch).expect("spans serialize")).await?;
        let body: serde_json::Value = resp.json().await.map_err(|e| JobError::Push(e.to_string()))?;
        if body["rejected"].as_array().is_some_and(|r| !r.is_empty()) {
            return Err(JobError::Push(format!("server rejected spans: {}", body["rejected"])));
        }
        report.inserted += body["inserted"].as_u64().unwrap_or(0) as usize;
        report.batches += 1;
    }
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct LinkJob {
    pub application: String,
    pub base: String,
    pub target: String,
    pub base_window: Option<u64>,
    pub target_window: Option<u64>,
    pub frontend_url: Option<String>,
    pub ghs: GhsConfig,
}

/// Builds the deep link and upserts it into the change request
/// description. Returns the resulting description.
pub async fn run_link_job(
    client: &reqwest::Client,
    job: &LinkJob,
    env: impl Fn(&str) -> Option<String>,
) -> Result<String, JobError> {
    for c in [&job.base, &job.target] {
        if !is_commit_hash(c) {
            return Err(JobError::Usage(format!("commit {c:?} is not a 40 character lowercase hex hash")));
        }
    }
    let frontend = job
        .frontend_url
        .clone()
        .or_else(|| env("CODECITY_FRONTEND_URL"))
        .ok_or_else(|| JobError::Usage("no frontend url: pass --frontend-url or set CODECITY_FRONTEND_URL".into()))?;
    let link = build_deep_link(&frontend, &job.application, &job.base, &job.target, job.base_window, job.target_window)
        .map_err(JobError::Link)?;
    let token = job.ghs.token(&env).map_err(JobError::Link)?;
    upsert_cr_link(client, &job.ghs, &token, &link).await.map_err(JobError::Link)
}

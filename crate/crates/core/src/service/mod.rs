//! Review backend: persistence, comparison API, deep links and change
//! request description updates.

mod ghs;
mod http;
mod store;

use std::io;
use std::net::SocketAddr;
use std::path::PathBuf;

use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use thiserror::Error;

use crate::compare::CompareError;

pub use ghs::{upsert_cr_link, upsert_marker_block, GhsConfig, LINK_BEGIN, LINK_END};
pub use http::{router, serve};
pub use store::{CommitSummary, ComparisonRequest, ComparisonResponse, ReviewStore, StoreOutcome};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("invalid document: {0}")]
    Invalid(String),
    #[error("conflict: {0}")]
    Conflict(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error(transparent)]
    Compare(#[from] CompareError),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("credentials rejected: {0}")]
    Credentials(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("remote service answered {status}: {body}")]
    Remote { status: u16, body: String },
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl ServiceError {
    /// Transport failures may succeed when retried unchanged.
    pub fn is_retryable(&self) -> bool {
        matches!(self, ServiceError::Transport(_))
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        ServiceError::Io { path: path.into(), source }
    }
}

pub const DEFAULT_LISTEN_ADDR: &str = "127.0.0.1:8080";
pub const DEFAULT_DATA_DIR: &str = "codecity-data";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceConfig {
    pub listen_addr: SocketAddr,
    pub data_dir: PathBuf,
    pub frontend_url: Option<String>,
}

impl ServiceConfig {
    /// Reads `CODECITY_LISTEN_ADDR`, `CODECITY_DATA_DIR` and
    /// `CODECITY_FRONTEND_URL` through `env`.
    pub fn from_env(env: impl Fn(&str) -> Option<String>) -> Result<Self, ServiceError> {
        let addr = env("CODECITY_LISTEN_ADDR").unwrap_or_else(|| DEFAULT_LISTEN_ADDR.to_string());
        let listen_addr = addr.parse().map_err(|e| ServiceError::Config(format!("CODECITY_LISTEN_ADDR {addr:?}: {e}")))?;
        let frontend_url = env("CODECITY_FRONTEND_URL");
        if let Some(u) = &frontend_url {
            check_absolute(u)?;
        }
        Ok(ServiceConfig {
            listen_addr,
            data_dir: env("CODECITY_DATA_DIR").map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_DATA_DIR)),
            frontend_url,
        })
    }
}

fn check_absolute(base: &str) -> Result<url::Url, ServiceError> {
    let u = url::Url::parse(base).map_err(|e| ServiceError::Config(format!("frontend url {base:?} is not absolute: {e}")))?;
    if u.cannot_be_a_base() {
        return Err(ServiceError::Config(format!("frontend url {base:?} cannot carry a path")));
    }
    Ok(u)
}

// RFC 3986 unreserved characters stay literal
const QUERY_VALUE: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'.').remove(b'_').remove(b'~');

/// `{base}/visualization?app=..&baseCommit=..&targetCommit=..` plus the
/// window parameters that are given.
pub fn build_deep_link(
    frontend_base: &str,
    application: &str,
    base: &str,
    target: &str,
    base_window: Option<u64>,
    target_window: Option<u64>,
) -> Result<String, ServiceError> {
    check_absolute(frontend_base)?;
    let mut params = vec![("app", application.to_string()), ("baseCommit", base.to_string()), ("targetCommit", target.to_string())];
    if let Some(w) = base_window {
        params.push(("baseWindow", w.to_string()));
    }
    if let Some(w) = target_window {
        params.push(("targetWindow", w.to_string()));
    }
    let query: Vec<String> =
        params.iter().map(|(k, v)| format!("{k}={}", utf8_percent_encode(v, QUERY_VALUE))).collect();
    Ok(format!("{}/visualization?{}", frontend_base.trim_end_matches('/'), query.join("&")))
}

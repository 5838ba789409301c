//! Span ingestion, trace reconstruction and fixed-window runtime aggregation.

mod aggregate;
mod document;
mod store;
mod tree;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use aggregate::{aggregate_window, RuntimeSnapshot};
pub use document::{SpanAttrsDoc, SpanDoc, SpansDocument, SPANS_SCHEMA};
pub use store::{IngestError, IngestOutcome, Rejection, SpanStore};
pub use tree::{derive_edges, reconstruct_trace, SpanNode, TraceError, TraceTree};

/// Fixed aggregation window: ten seconds in nanoseconds.
pub const WINDOW_NS: i64 = 10_000_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SpanAttrs {
    pub class: String,
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance_id: Option<String>,
}

/// One timed method execution, stamped with the commit it ran on.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SpanRecord {
    pub trace_id: String,
    pub span_id: String,
    pub parent_span_id: Option<String>,
    pub start_ns: i64,
    pub end_ns: i64,
    pub attrs: SpanAttrs,
    pub application: String,
    pub commit: String,
}

impl SpanRecord {
    /// Checks field formats; the returned reason is stable and machine readable.
    pub fn validate(&self) -> Result<(), &'static str> {
        if !crate::model::is_lower_hex(&self.trace_id, 32) {
            return Err("malformed-trace-id");
        }
        if !crate::model::is_lower_hex(&self.span_id, 16) {
            return Err("malformed-span-id");
        }
        if let Some(p) = &self.parent_span_id {
            if !crate::model::is_lower_hex(p, 16) {
                return Err("malformed-parent-span-id");
            }
        }
        if self.start_ns < 0 {
            return Err("negative-start");
        }
        if self.end_ns < self.start_ns {
            return Err("negative-duration");
        }
        if self.attrs.class.is_empty() {
            return Err("missing-class");
        }
        if self.attrs.method.is_empty() {
            return Err("missing-method");
        }
        if !crate::model::is_commit_hash(&self.commit) {
            return Err("malformed-commit");
        }
        if crate::model::validate_application(&self.application).is_err() {
            return Err("malformed-application");
        }
        Ok(())
    }

    pub fn window(&self) -> u64 {
        window_index(self.start_ns).unwrap_or(0)
    }
}

/// Runtime class names may use the JVM's `Outer$Inner` form; source fqns use
/// dots.
pub fn normalize_class_name(name: &str) -> String {
    name.replace('$', ".")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("negative timestamp {0}")]
pub struct WindowError(pub i64);

/// Index of the half-open ten second window `[k*10s, (k+1)*10s)` holding
/// `start_ns`, aligned to the unix epoch.
pub fn window_index(start_ns: i64) -> Result<u64, WindowError> {
    if start_ns < 0 {
        return Err(WindowError(start_ns));
    }
    Ok((start_ns / WINDOW_NS) as u64)
}

/// A directed call between two classes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EdgeKey {
    pub caller_class: String,
    pub caller_method: String,
    pub callee_class: String,
    pub callee_method: String,
}

impl EdgeKey {
    pub fn new(caller_class: &str, caller_method: &str, callee_class: &str, callee_method: &str) -> Self {
        EdgeKey {
            caller_class: caller_class.to_string(),
            caller_method: caller_method.to_string(),
            callee_class: callee_class.to_string(),
            callee_method: callee_method.to_string(),
        }
    }
}

impl std::fmt::Display for EdgeKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}.{} -> {}.{}", self.caller_class, self.caller_method, self.callee_class, self.callee_method)
    }
}

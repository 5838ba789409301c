//! The `codecity-spans/1` document.

use serde::{Deserialize, Serialize};

use super::{SpanAttrs, SpanRecord};
use crate::agent::DocumentError;

pub const SPANS_SCHEMA: &str = "codecity-spans/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SpanAttrsDoc {
    pub class: String,
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SpanDoc {
    pub trace_id: String,
    pub span_id: String,
    #[serde(default)]
    pub parent_span_id: Option<String>,
    pub start_ns: i64,
    pub end_ns: i64,
    pub attrs: SpanAttrsDoc,
}

/// Span batch. Replay fixtures leave `application` and `commit` unset; the
/// ingest endpoint requires both.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SpansDocument {
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub application: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub commit: Option<String>,
    pub spans: Vec<SpanDoc>,
}

impl SpansDocument {
    pub fn parse(bytes: &[u8]) -> Result<Self, DocumentError> {
        let doc: SpansDocument = serde_json::from_slice(bytes)?;
        if doc.schema != SPANS_SCHEMA {
            return Err(DocumentError::Schema(doc.schema));
        }
        Ok(doc)
    }

    pub fn from_records(application: &str, commit: &str, spans: &[SpanRecord]) -> Self {
        SpansDocument {
            schema: SPANS_SCHEMA.to_string(),
            application: Some(application.to_string()),
            commit: Some(commit.to_string()),
            spans: spans
                .iter()
                .map(|s| SpanDoc {
                    trace_id: s.trace_id.clone(),
                    span_id: s.span_id.clone(),
                    parent_span_id: s.parent_span_id.clone(),
                    start_ns: s.start_ns,
                    end_ns: s.end_ns,
                    attrs: SpanAttrsDoc {
                        class: s.attrs.class.clone(),
                        method: s.attrs.method.clone(),
                        instance_id: s.attrs.instance_id.clone(),
                    },
                })
                .collect(),
        }
    }

    /// Stamps every span with the document's application and commit.
    pub fn into_records(self) -> Result<Vec<SpanRecord>, DocumentError> {
        let application = self.application.ok_or_else(|| DocumentError::Invalid("missing application".into()))?;
        let commit = self.commit.ok_or_else(|| DocumentError::Invalid("missing commit".into()))?;
        Ok(self
            .spans
            .into_iter()
            .map(|s| SpanRecord {
                trace_id: s.trace_id,
                span_id: s.span_id,
                parent_span_id: s.parent_span_id,
                start_ns: s.start_ns,
                end_ns: s.end_ns,
                attrs: SpanAttrs { class: s.attrs.class, method: s.attrs.method, instance_id: s.attrs.instance_id },
                application: application.clone(),
                commit: commit.clone(),
            })
            .collect())
    }
}

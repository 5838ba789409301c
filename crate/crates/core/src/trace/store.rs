use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, RwLock};

use thiserror::Error;

use super::{aggregate_window, normalize_class_name, RuntimeSnapshot, SpanRecord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IngestError {
    #[error("empty span batch")]
    EmptyBatch,
    #[error("batch mixes applications or commits (record {index} is {application}@{commit})")]
    MixedBatch { index: usize, application: String, commit: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestOutcome {
    /// New spans plus idempotent re-deliveries.
    pub accepted: usize,
    pub rejected: Vec<Rejection>,
    /// Spans that were not stored before this batch.
    pub inserted: Vec<SpanRecord>,
}

type Scope = (String, String);
type SpanId = (String, String);

#[derive(Default)]
struct ScopeSpans {
    spans: BTreeMap<SpanId, SpanRecord>,
    view: Option<Arc<Vec<SpanRecord>>>,
}

/// Append-only span store keyed by (application, commit), deduplicated on
/// (trace id, span id). Safe for concurrent ingestion.
#[derive(Default)]
pub struct SpanStore {
    scopes: RwLock<HashMap<Scope, ScopeSpans>>,
}

impl SpanStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn ingest(&self, batch: Vec<SpanRecord>) -> Result<IngestOutcome, IngestError> {
        let first = batch.first().ok_or(IngestError::EmptyBatch)?;
        let scope = (first.application.clone(), first.commit.clone());
        if let Some((index, r)) =
            batch.iter().enumerate().find(|(_, r)| r.application != scope.0 || r.commit != scope.1)
        {
            return Err(IngestError::MixedBatch { index, application: r.application.clone(), commit: r.commit.clone() });
        }
        let mut outcome = IngestOutcome::default();
        let mut valid = Vec::with_capacity(batch.len());
        for (index, mut r) in batch.into_iter().enumerate() {
            match r.validate() {
                Ok(()) => {
                    r.attrs.class = normalize_class_name(&r.attrs.class);
                    valid.push(r);
                }
                Err(reason) => outcome.rejected.push(Rejection { index, reason: reason.to_string() }),
            }
        }
        let mut scopes = self.scopes.write().expect("span store lock poisoned");
        let entry = scopes.entry(scope).or_default();
        for r in valid {
            outcome.accepted += 1;
            let key = (r.trace_id.clone(), r.span_id.clone());
            if let std::collections::btree_map::Entry::Vacant(slot) = entry.spans.entry(key) {
                slot.insert(r.clone());
                outcome.inserted.push(r);
            }
        }
        if !outcome.inserted.is_empty() {
            entry.view = None;
        }
        Ok(outcome)
    }

    /// Immutable view of every span stored for (application, commit),
    /// ordered by (trace id, span id).
    pub fn view(&self, application: &str, commit: &str) -> Arc<Vec<SpanRecord>> {
        let key = (application.to_string(), commit.to_string());
        {
            let scopes = self.scopes.read().expect("span store lock poisoned");
            match scopes.get(&key) {
                None => return Arc::new(Vec::new()),
                Some(s) => {
                    if let Some(v) = &s.view {
                        return v.clone();
                    }
                }
            }
        }
        let mut scopes = self.scopes.write().expect("span store lock poisoned");
        let s = scopes.get_mut(&key).expect("scope exists");
        s.view.get_or_insert_with(|| Arc::new(s.spans.values().cloned().collect())).clone()
    }

    pub fn len(&self, application: &str, commit: &str) -> usize {
        let scopes = self.scopes.read().expect("span store lock poisoned");
        scopes.get(&(application.to_string(), commit.to_string())).map_or(0, |s| s.spans.len())
    }

    pub fn is_empty(&self, application: &str, commit: &str) -> bool {
        self.len(application, commit) == 0
    }

    /// Sorted indices of windows holding at least one span.
    pub fn windows(&self, application: &str, commit: &str) -> Vec<u64> {
        let v = self.view(application, commit);
        v.iter().map(SpanRecord::window).collect::<BTreeSet<_>>().into_iter().collect()
    }

    pub fn runtime_snapshot(&self, application: &str, commit: &str, window: u64) -> Option<RuntimeSnapshot> {
        let v = self.view(application, commit);
        if !v.iter().any(|s| s.window() == window) {
            return None;
        }
        Some(aggregate_window(application, commit, window, &v))
    }
}

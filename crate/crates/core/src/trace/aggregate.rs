use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use super::tree::{edges_where, reconstruct_lenient};
use super::{EdgeKey, SpanRecord, WINDOW_NS};

/// Runtime behavior of one commit aggregated over one ten second window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuntimeSnapshot {
    pub application: String,
    pub commit: String,
    pub window_index: u64,
    pub window_ns: i64,
    pub class_instances: BTreeMap<String, u64>,
    pub method_calls: BTreeMap<(String, String), u64>,
    pub edges: BTreeMap<EdgeKey, u64>,
}

impl RuntimeSnapshot {
    pub fn total_calls(&self) -> u64 {
        self.method_calls.values().sum()
    }
}

/// Aggregates the spans of `window`.
///
/// `spans` may also hold spans of other windows of the same commit; those
/// are only consulted to find the caller of a span that starts inside the
/// window. An edge is counted in the window of its callee span.
///
/// Instance counts are the number of distinct `instanceId` values seen for a
/// class; a class that never reports one falls back to its call count.
pub fn aggregate_window(application: &str, commit: &str, window: u64, spans: &[SpanRecord]) -> RuntimeSnapshot {
    let in_window = |s: &SpanRecord| s.window() == window;

    let mut instances: HashMap<&str, HashSet<&str>> = HashMap::new();
    let mut class_calls: HashMap<&str, u64> = HashMap::new();
    let mut method_calls: BTreeMap<(String, String), u64> = BTreeMap::new();
    let mut traces: BTreeSet<&str> = BTreeSet::new();
    for s in spans.iter().filter(|s| in_window(s)) {
        let class = s.attrs.class.as_str();
        *class_calls.entry(class).or_insert(0) += 1;
        let ids = instances.entry(class).or_default();
        if let Some(id) = &s.attrs.instance_id {
            ids.insert(id.as_str());
        }
        *method_calls.entry((s.attrs.class.clone(), s.attrs.method.clone())).or_insert(0) += 1;
        traces.insert(s.trace_id.as_str());
    }

    let mut by_trace: HashMap<&str, Vec<SpanRecord>> = HashMap::new();
    let mut seen: HashSet<(&str, &str)> = HashSet::new();
    for s in spans {
        if traces.contains(s.trace_id.as_str()) && seen.insert((s.trace_id.as_str(), s.span_id.as_str())) {
            by_trace.entry(s.trace_id.as_str()).or_default().push(s.clone());
        }
    }
    let mut edges: BTreeMap<EdgeKey, u64> = BTreeMap::new();
    for trace in &traces {
        let Some(members) = by_trace.get(trace) else { continue };
        let Ok(tree) = reconstruct_lenient(members) else { continue };
        for (k, n) in edges_where(&tree, in_window) {
            *edges.entry(k).or_insert(0) += n;
        }
    }

    let mut class_instances: BTreeMap<String, u64> = class_calls
        .iter()
        .map(|(c, calls)| {
            let distinct = instances.get(c).map_or(0, HashSet::len) as u64;
            (c.to_string(), if distinct > 0 { distinct } else { *calls })
        })
        .collect();
    for k in edges.keys() {
        class_instances.entry(k.caller_class.clone()).or_insert(0);
        class_instances.entry(k.callee_class.clone()).or_insert(0);
    }

    RuntimeSnapshot {
        application: application.to_string(),
        commit: commit.to_string(),
        window_index: window,
        window_ns: WINDOW_NS,
        class_instances,
        method_calls,
        edges,
    }
}

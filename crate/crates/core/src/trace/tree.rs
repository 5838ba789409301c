use std::collections::{BTreeMap, HashMap, HashSet};

use thiserror::Error;

use super::{EdgeKey, SpanRecord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("no spans given")]
    Empty,
    #[error("span {0} appears more than once")]
    DuplicateSpan(String),
    #[error("spans belong to different traces ({0} and {1})")]
    MixedTrace(String, String),
    #[error("cyclic parent links between spans {0:?}")]
    Cycle(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanNode {
    pub span: SpanRecord,
    /// The span names a parent that is not part of the trace.
    pub orphan: bool,
    pub children: Vec<SpanNode>,
}

impl SpanNode {
    fn count(&self) -> usize {
        1 + self.children.iter().map(SpanNode::count).sum::<usize>()
    }

    fn depth(&self) -> usize {
        1 + self.children.iter().map(SpanNode::depth).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceTree {
    pub trace_id: String,
    pub roots: Vec<SpanNode>,
}

impl TraceTree {
    pub fn node_count(&self) -> usize {
        self.roots.iter().map(SpanNode::count).sum()
    }

    pub fn depth(&self) -> usize {
        self.roots.iter().map(SpanNode::depth).max().unwrap_or(0)
    }

    pub fn orphans(&self) -> Vec<&SpanRecord> {
        self.roots.iter().filter(|r| r.orphan).map(|r| &r.span).collect()
    }

    /// Every (parent, child) pair, depth first.
    pub fn parent_child_pairs(&self) -> Vec<(&SpanRecord, &SpanRecord)> {
        fn walk<'a>(n: &'a SpanNode, out: &mut Vec<(&'a SpanRecord, &'a SpanRecord)>) {
            for c in &n.children {
                out.push((&n.span, &c.span));
                walk(c, out);
            }
        }
        let mut out = Vec::new();
        for r in &self.roots {
            walk(r, &mut out);
        }
        out
    }
}

fn order_key(s: &SpanRecord) -> (i64, &str) {
    (s.start_ns, s.span_id.as_str())
}

/// Rebuilds the span tree of one trace. Spans whose parent is missing become
/// flagged orphan roots; children are ordered by (start, span id).
pub fn reconstruct_trace(spans: &[SpanRecord]) -> Result<TraceTree, TraceError> {
    build(spans, false)
}

/// Like [`reconstruct_trace`] but breaks parent cycles by promoting the
/// earliest span of each cycle to an orphan root.
pub(crate) fn reconstruct_lenient(spans: &[SpanRecord]) -> Result<TraceTree, TraceError> {
    build(spans, true)
}

fn build(spans: &[SpanRecord], break_cycles: bool) -> Result<TraceTree, TraceError> {
    let first = spans.first().ok_or(TraceError::Empty)?;
    let mut by_id: HashMap<&str, usize> = HashMap::with_capacity(spans.len());
    for (i, s) in spans.iter().enumerate() {
        if s.trace_id != first.trace_id {
            return Err(TraceError::MixedTrace(first.trace_id.clone(), s.trace_id.clone()));
        }
        if by_id.insert(s.span_id.as_str(), i).is_some() {
            return Err(TraceError::DuplicateSpan(s.span_id.clone()));
        }
    }
    let mut children: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut roots: Vec<(usize, bool)> = Vec::new();
    for (i, s) in spans.iter().enumerate() {
        match s.parent_span_id.as_deref().and_then(|p| by_id.get(p)) {
            Some(&p) if p != i => children.entry(p).or_default().push(i),
            Some(_) => {} // self-parent: a one-span cycle
            None => roots.push((i, s.parent_span_id.is_some())),
        }
    }
    for kids in children.values_mut() {
        kids.sort_by(|&a, &b| order_key(&spans[a]).cmp(&order_key(&spans[b])));
    }

    fn mark(start: usize, children: &HashMap<usize, Vec<usize>>, reached: &mut HashSet<usize>) {
        let mut stack = vec![start];
        while let Some(n) = stack.pop() {
            if reached.insert(n) {
                if let Some(k) = children.get(&n) {
                    stack.extend(k.iter().copied());
                }
            }
        }
    }
    let mut reached: HashSet<usize> = HashSet::with_capacity(spans.len());
    for &(r, _) in &roots {
        mark(r, &children, &mut reached);
    }
    if reached.len() < spans.len() {
        if !break_cycles {
            let mut stuck: Vec<String> =
                (0..spans.len()).filter(|i| !reached.contains(i)).map(|i| spans[i].span_id.clone()).collect();
            stuck.sort();
            return Err(TraceError::Cycle(stuck));
        }
        loop {
            let next = (0..spans.len()).filter(|i| !reached.contains(i)).min_by(|&a, &b| order_key(&spans[a]).cmp(&order_key(&spans[b])));
            let Some(n) = next else { break };
            // detach from its parent so the promoted root is not also a child
            for kids in children.values_mut() {
                kids.retain(|&k| k != n);
            }
            roots.push((n, true));
            mark(n, &children, &mut reached);
        }
    }
    roots.sort_by(|a, b| order_key(&spans[a.0]).cmp(&order_key(&spans[b.0])));

    // iterative post-order assembly
    fn assemble(i: usize, spans: &[SpanRecord], children: &HashMap<usize, Vec<usize>>, orphan: bool) -> SpanNode {
        let mut stack: Vec<(usize, usize, Vec<SpanNode>)> = vec![(i, 0, Vec::new())];
        loop {
            let top = stack.last_mut().expect("non-empty");
            let kids = children.get(&top.0).map(Vec::as_slice).unwrap_or(&[]);
            if top.1 < kids.len() {
                let k = kids[top.1];
                top.1 += 1;
                stack.push((k, 0, Vec::new()));
                continue;
            }
            let (idx, _, built) = stack.pop().expect("non-empty");
            let node = SpanNode { span: spans[idx].clone(), orphan: false, children: built };
            match stack.last_mut() {
                Some(parent) => parent.2.push(node),
                None => return SpanNode { orphan, ..node },
            }
        }
    }
    let roots = roots.into_iter().map(|(r, orphan)| assemble(r, spans, &children, orphan)).collect();
    Ok(TraceTree { trace_id: first.trace_id.clone(), roots })
}

/// Inter-class call edges with occurrence counts. Parent and child spans of
/// the same class produce no edge.
pub fn derive_edges(t: &TraceTree) -> Vec<(EdgeKey, u64)> {
    edges_where(t, |_| true).into_iter().collect()
}

pub(crate) fn edges_where(t: &TraceTree, keep_child: impl Fn(&SpanRecord) -> bool) -> BTreeMap<EdgeKey, u64> {
    let mut out = BTreeMap::new();
    for (p, c) in t.parent_child_pairs() {
        if p.attrs.class != c.attrs.class && keep_child(c) {
            let key = EdgeKey::new(&p.attrs.class, &p.attrs.method, &c.attrs.class, &c.attrs.method);
            *out.entry(key).or_insert(0) += 1;
        }
    }
    out
}

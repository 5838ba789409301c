use std::collections::{BTreeMap, BTreeSet};

use super::{ChangeStatus, CompareError};
use crate::trace::{EdgeKey, RuntimeSnapshot};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeDiff {
    pub status: ChangeStatus,
    pub base_count: Option<u64>,
    pub target_count: Option<u64>,
}

/// Presence-based diff of two runtime windows. Either side may be absent.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuntimeDiff {
    pub edges: BTreeMap<EdgeKey, EdgeDiff>,
    /// Instance counts per class (base, target).
    pub classes: BTreeMap<String, (Option<u64>, Option<u64>)>,
    /// Call counts per (class, method name) (base, target).
    pub methods: BTreeMap<(String, String), (Option<u64>, Option<u64>)>,
}

fn pairs<K: Ord + Clone>(
    base: Option<&BTreeMap<K, u64>>,
    target: Option<&BTreeMap<K, u64>>,
) -> BTreeMap<K, (Option<u64>, Option<u64>)> {
    let keys: BTreeSet<&K> = base.into_iter().flat_map(|m| m.keys()).chain(target.into_iter().flat_map(|m| m.keys())).collect();
    keys.into_iter()
        .map(|k| (k.clone(), (base.and_then(|m| m.get(k).copied()), target.and_then(|m| m.get(k).copied()))))
        .collect()
}

/// Edge status follows key presence only: a count change keeps an edge
/// `unchanged`, the counts are reported alongside.
pub fn diff_runtime(base: Option<&RuntimeSnapshot>, target: Option<&RuntimeSnapshot>) -> Result<RuntimeDiff, CompareError> {
    if base.is_none() && target.is_none() {
        return Err(CompareError::Contract("diff_runtime called with both sides absent".into()));
    }
    let edges = pairs(base.map(|r| &r.edges), target.map(|r| &r.edges))
        .into_iter()
        .map(|(k, (b, t))| {
            let status = ChangeStatus::from_presence(b.is_some(), t.is_some()).expect("key came from one side");
            (k, EdgeDiff { status, base_count: b, target_count: t })
        })
        .collect();
    Ok(RuntimeDiff {
        edges,
        classes: pairs(base.map(|r| &r.class_instances), target.map(|r| &r.class_instances)),
        methods: pairs(base.map(|r| &r.method_calls), target.map(|r| &r.method_calls)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rs(edges: &[(EdgeKey, u64)]) -> RuntimeSnapshot {
        let mut class_instances = BTreeMap::new();
        for (k, _) in edges {
            class_instances.insert(k.caller_class.clone(), 1);
            class_instances.insert(k.callee_class.clone(), 1);
        }
        RuntimeSnapshot {
            application: "app".into(),
            commit: "c".repeat(40),
            window_index: 0,
            window_ns: crate::trace::WINDOW_NS,
            class_instances,
            method_calls: BTreeMap::new(),
            edges: edges.iter().cloned().collect(),
        }
    }

    #[test]
    fn added_edge() {
        let e = EdgeKey::new("A", "f", "B", "g");
        let d = diff_runtime(Some(&rs(&[])), Some(&rs(&[(e.clone(), 2)]))).unwrap();
        assert_eq!(d.edges[&e], EdgeDiff { status: ChangeStatus::Added, base_count: None, target_count: Some(2) });
    }

    #[test]
    fn count_change_is_unchanged() {
        let e = EdgeKey::new("A", "f", "B", "g");
        let d = diff_runtime(Some(&rs(&[(e.clone(), 3)])), Some(&rs(&[(e.clone(), 7)]))).unwrap();
        assert_eq!(d.edges[&e], EdgeDiff { status: ChangeStatus::Unchanged, base_count: Some(3), target_count: Some(7) });
    }

    #[test]
    fn absent_base_side() {
        let e1 = EdgeKey::new("A", "f", "B", "g");
        let e2 = EdgeKey::new("B", "g", "C", "h");
        let d = diff_runtime(None, Some(&rs(&[(e1, 1), (e2, 4)]))).unwrap();
        assert!(d.edges.values().all(|e| e.status == ChangeStatus::Added));
        assert_eq!(d.classes["A"], (None, Some(1)));
        assert!(diff_runtime(None, None).is_err());
    }
}

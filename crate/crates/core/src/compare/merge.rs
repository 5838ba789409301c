use std::collections::{BTreeMap, BTreeSet};

use super::{
    ChangeStatus, ComparedEdge, ComparedEntity, ComparisonModel, EntityKey, EntityKind, EntityMetrics, Origin,
    RuntimeDiff, StructuralDiff,
};
use crate::model::CommitRef;

#[derive(Debug, Clone)]
struct Node {
    parent: Option<EntityKey>,
    status: ChangeStatus,
    is_static: bool,
    runtime_base: bool,
    runtime_target: bool,
    base_metrics: Option<EntityMetrics>,
    target_metrics: Option<EntityMetrics>,
    base_instances: Option<u64>,
    target_instances: Option<u64>,
    base_calls: Option<u64>,
    target_calls: Option<u64>,
}

impl Node {
    fn dynamic(parent: Option<EntityKey>, base: bool, target: bool) -> Node {
        Node {
            parent,
            status: ChangeStatus::from_presence(base, target).unwrap_or(ChangeStatus::Unchanged),
            is_static: false,
            runtime_base: base,
            runtime_target: target,
            base_metrics: None,
            target_metrics: None,
            base_instances: None,
            target_instances: None,
            base_calls: None,
            target_calls: None,
        }
    }
}

/// Runtime counts of a static entity only attach to the sides on which the
/// entity exists in source.
fn side_filter(n: &Node, b: Option<u64>, t: Option<u64>) -> (Option<u64>, Option<u64>) {
    if !n.is_static {
        return (b, t);
    }
    (b.filter(|_| n.base_metrics.is_some()), t.filter(|_| n.target_metrics.is_some()))
}

fn parent_of(path: &str) -> Option<&str> {
    path.rsplit_once('.').map(|(p, _)| p)
}

/// Places a runtime-only class: under a known class when its fqn extends
/// one, otherwise under the package path its fqn implies.
fn runtime_parent(nodes: &mut BTreeMap<EntityKey, Node>, fqn: &str) -> Option<EntityKey> {
    let prefix = parent_of(fqn)?;
    let as_class = EntityKey::class(prefix);
    if nodes.contains_key(&as_class) {
        return Some(as_class);
    }
    Some(ensure_package(nodes, prefix))
}

fn ensure_package(nodes: &mut BTreeMap<EntityKey, Node>, path: &str) -> EntityKey {
    let key = EntityKey::package(path);
    if !nodes.contains_key(&key) {
        let parent = parent_of(path).map(|p| ensure_package(nodes, p));
        nodes.insert(key.clone(), Node::dynamic(parent, false, false));
    }
    key
}

/// Unites the structural diff with the runtime diff into one entity tree.
///
/// Entities found in a structural snapshot take their status from the
/// structural diff; runtime-only entities take it from runtime presence.
/// Package statuses are recomputed over the merged tree.
pub fn merge_comparison(
    structural: &StructuralDiff,
    runtime: Option<&RuntimeDiff>,
    base: &CommitRef,
    target: &CommitRef,
    base_window: Option<u64>,
    target_window: Option<u64>,
) -> ComparisonModel {
    let mut nodes: BTreeMap<EntityKey, Node> = structural
        .iter()
        .map(|(k, e)| {
            (
                k.clone(),
                Node {
                    parent: e.parent.clone(),
                    status: e.status,
                    is_static: true,
                    runtime_base: false,
                    runtime_target: false,
                    base_metrics: e.base,
                    target_metrics: e.target,
                    base_instances: None,
                    target_instances: None,
                    base_calls: None,
                    target_calls: None,
                },
            )
        })
        .collect();

    let empty = RuntimeDiff::default();
    let rt = runtime.unwrap_or(&empty);

    // BTreeMap order visits an outer class before any class nested in it
    for (fqn, &(b, t)) in &rt.classes {
        let key = EntityKey::class(fqn);
        if !nodes.contains_key(&key) {
            let parent = runtime_parent(&mut nodes, fqn);
            nodes.insert(key.clone(), Node::dynamic(parent, b.is_some(), t.is_some()));
        }
        let n = nodes.get_mut(&key).expect("inserted above");
        let (b, t) = side_filter(n, b, t);
        n.base_instances = b;
        n.target_instances = t;
        n.runtime_base |= b.is_some();
        n.runtime_target |= t.is_some();
    }

    for ((class, method), &(b, t)) in &rt.methods {
        let class_key = EntityKey::class(class);
        if !nodes.contains_key(&class_key) {
            let parent = runtime_parent(&mut nodes, class);
            nodes.insert(class_key.clone(), Node::dynamic(parent, b.is_some(), t.is_some()));
        }
        // overloads share a runtime method name
        let prefix = format!("{class}#{method}(");
        let start = EntityKey { kind: EntityKind::Method, id: prefix.clone() };
        let matches: Vec<EntityKey> = nodes
            .range(start..)
            .take_while(|(k, _)| k.kind == EntityKind::Method && k.id.starts_with(&prefix))
            .map(|(k, _)| k.clone())
            .collect();
        if matches.is_empty() {
            let key = EntityKey::method(class, method);
            nodes.insert(key.clone(), Node { base_calls: b, target_calls: t, ..Node::dynamic(Some(class_key), b.is_some(), t.is_some()) });
        } else {
            for k in matches {
                let n = nodes.get_mut(&k).expect("matched key");
                let (b, t) = side_filter(n, b, t);
                n.base_calls = b;
                n.target_calls = t;
                n.runtime_base |= b.is_some();
                n.runtime_target |= t.is_some();
            }
        }
    }

    // runtime presence flows to every ancestor
    let present: Vec<(EntityKey, bool, bool)> = nodes
        .iter()
        .filter(|(_, n)| n.runtime_base || n.runtime_target)
        .map(|(k, n)| (k.clone(), n.runtime_base, n.runtime_target))
        .collect();
    for (k, b, t) in present {
        let mut cur = nodes[&k].parent.clone();
        while let Some(p) = cur {
            let n = nodes.get_mut(&p).expect("parent exists");
            n.runtime_base |= b;
            n.runtime_target |= t;
            cur = n.parent.clone();
        }
    }

    // package roll-up over the merged tree
    for (k, n) in nodes.iter_mut() {
        if k.kind != EntityKind::Package {
            continue;
        }
        if !n.is_static {
            n.status = ChangeStatus::from_presence(n.runtime_base, n.runtime_target).unwrap_or(ChangeStatus::Unchanged);
        }
        if n.status == ChangeStatus::Modified {
            n.status = ChangeStatus::Unchanged;
        }
    }
    let changed: Vec<EntityKey> =
        nodes.iter().filter(|(_, n)| n.status != ChangeStatus::Unchanged).map(|(k, _)| k.clone()).collect();
    for k in changed {
        let mut cur = nodes[&k].parent.clone();
        while let Some(p) = cur {
            let n = nodes.get_mut(&p).expect("parent exists");
            if p.kind == EntityKind::Package && n.status == ChangeStatus::Unchanged {
                n.status = ChangeStatus::Modified;
            }
            cur = n.parent.clone();
        }
    }

    let mut children: BTreeMap<Option<EntityKey>, BTreeSet<EntityKey>> = BTreeMap::new();
    for (k, n) in &nodes {
        children.entry(n.parent.clone()).or_default().insert(k.clone());
    }
    fn build(key: &EntityKey, nodes: &BTreeMap<EntityKey, Node>, children: &BTreeMap<Option<EntityKey>, BTreeSet<EntityKey>>) -> ComparedEntity {
        let n = &nodes[key];
        ComparedEntity {
            fqn: key.id.clone(),
            entity_kind: key.kind,
            status: n.status,
            origin: Origin::from_flags(n.is_static, n.runtime_base || n.runtime_target),
            base_metrics: n.base_metrics,
            target_metrics: n.target_metrics,
            base_instances: n.base_instances,
            target_instances: n.target_instances,
            base_calls: n.base_calls,
            target_calls: n.target_calls,
            children: children
                .get(&Some(key.clone()))
                .map(|c| c.iter().map(|k| build(k, nodes, children)).collect())
                .unwrap_or_default(),
        }
    }
    let entities = children
        .get(&None)
        .map(|roots| roots.iter().map(|k| build(k, &nodes, &children)).collect())
        .unwrap_or_default();

    let edges = rt
        .edges
        .iter()
        .map(|(k, e)| ComparedEdge { key: k.clone(), status: e.status, base_count: e.base_count, target_count: e.target_count })
        .collect();

    ComparisonModel {
        base: base.clone(),
        target: target.clone(),
        base_window,
        target_window,
        entities,
        edges,
    }
}

//! Commit-to-commit comparison of structure and runtime behavior.

mod filter;
mod merge;
mod runtime;
mod structure;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use filter::{apply_filter, FilterMode};
pub use merge::merge_comparison;
pub use runtime::{diff_runtime, EdgeDiff, RuntimeDiff};
pub use structure::{classify_class, diff_structures, StructuralDiff, StructuralEntry};

use crate::model::{CommitRef, LocMetrics};
use crate::trace::EdgeKey;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompareError {
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("invalid filter mode: at least one of static or dynamic data must be included")]
    InvalidMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChangeStatus {
    Added,
    Deleted,
    Modified,
    Unchanged,
}

impl ChangeStatus {
    /// Status from presence on each side when both are present and equal.
    pub fn from_presence(base: bool, target: bool) -> Option<ChangeStatus> {
        match (base, target) {
            (false, false) => None,
            (false, true) => Some(ChangeStatus::Added),
            (true, false) => Some(ChangeStatus::Deleted),
            (true, true) => Some(ChangeStatus::Unchanged),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Static,
    Dynamic,
    Both,
}

impl Origin {
    pub fn from_flags(is_static: bool, is_dynamic: bool) -> Origin {
        match (is_static, is_dynamic) {
            (true, true) => Origin::Both,
            (false, true) => Origin::Dynamic,
            _ => Origin::Static,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityKind {
    Package,
    Class,
    Method,
}

/// Identity of a structural entity within a comparison. Packages are keyed
/// by dotted path, classes by fqn, methods by `classFqn#signature`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EntityKey {
    pub kind: EntityKind,
    pub id: String,
}

impl EntityKey {
    pub fn package(path: &str) -> Self {
        EntityKey { kind: EntityKind::Package, id: path.to_string() }
    }

    pub fn class(fqn: &str) -> Self {
        EntityKey { kind: EntityKind::Class, id: fqn.to_string() }
    }

    pub fn method(class_fqn: &str, signature: &str) -> Self {
        EntityKey { kind: EntityKind::Method, id: format!("{class_fqn}#{signature}") }
    }
}

/// Per-side size metrics shown on hover and used for building footprints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EntityMetrics {
    pub loc: LocMetrics,
    pub method_count: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ComparedEntity {
    pub fqn: String,
    pub entity_kind: EntityKind,
    pub status: ChangeStatus,
    pub origin: Origin,
    pub base_metrics: Option<EntityMetrics>,
    pub target_metrics: Option<EntityMetrics>,
    pub base_instances: Option<u64>,
    pub target_instances: Option<u64>,
    pub base_calls: Option<u64>,
    pub target_calls: Option<u64>,
    pub children: Vec<ComparedEntity>,
}

impl ComparedEntity {
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a ComparedEntity)) {
        f(self);
        for c in &self.children {
            c.walk(f);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ComparedEdge {
    pub key: EdgeKey,
    pub status: ChangeStatus,
    pub base_count: Option<u64>,
    pub target_count: Option<u64>,
}

/// Merged, change-annotated view over two commits and up to two runtime
/// windows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ComparisonModel {
    pub base: CommitRef,
    pub target: CommitRef,
    pub base_window: Option<u64>,
    pub target_window: Option<u64>,
    pub entities: Vec<ComparedEntity>,
    pub edges: Vec<ComparedEdge>,
}

impl ComparisonModel {
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a ComparedEntity)) {
        for e in &self.entities {
            e.walk(f);
        }
    }

    /// Every entity, depth first.
    pub fn flatten(&self) -> Vec<&ComparedEntity> {
        let mut out = Vec::new();
        self.walk(&mut |e| out.push(e));
        out
    }

    pub fn find(&self, kind: EntityKind, fqn: &str) -> Option<&ComparedEntity> {
        self.flatten().into_iter().find(|e| e.entity_kind == kind && e.fqn == fqn)
    }

    pub fn count(&self, kind: EntityKind, status: ChangeStatus) -> usize {
        self.flatten().iter().filter(|e| e.entity_kind == kind && e.status == status).count()
    }
}

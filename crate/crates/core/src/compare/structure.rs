use std::collections::{BTreeMap, BTreeSet};

use super::{ChangeStatus, CompareError, EntityKey, EntityKind, EntityMetrics};
use crate::agent::StructuralSnapshot;
use crate::model::{join_path, ClassUnit, LocMetrics, MethodDecl, PackageNode};

/// Diff result for one structural entity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuralEntry {
    pub status: ChangeStatus,
    pub parent: Option<EntityKey>,
    pub base: Option<EntityMetrics>,
    pub target: Option<EntityMetrics>,
}

pub type StructuralDiff = BTreeMap<EntityKey, StructuralEntry>;

/// Classification of a class present on at most one side, or on both.
///
/// Both present: modified iff kind, superclass, interface set, method
/// signature set or code line count differ.
pub fn classify_class(base: Option<&ClassUnit>, target: Option<&ClassUnit>) -> Result<ChangeStatus, CompareError> {
    match (base, target) {
        (None, None) => Err(CompareError::Contract("classify_class called with both sides absent".into())),
        (None, Some(_)) => Ok(ChangeStatus::Added),
        (Some(_), None) => Ok(ChangeStatus::Deleted),
        (Some(b), Some(t)) => {
            let same = b.kind == t.kind
                && b.super_class == t.super_class
                && b.interfaces.iter().collect::<BTreeSet<_>>() == t.interfaces.iter().collect::<BTreeSet<_>>()
                && b.signatures() == t.signatures()
                && b.loc.code_lines == t.loc.code_lines;
            Ok(if same { ChangeStatus::Unchanged } else { ChangeStatus::Modified })
        }
    }
}

/// Methods present on both sides: modified iff modifiers or code lines differ.
fn classify_method(b: &MethodDecl, t: &MethodDecl) -> ChangeStatus {
    if b.modifiers == t.modifiers && b.loc.code_lines == t.loc.code_lines {
        ChangeStatus::Unchanged
    } else {
        ChangeStatus::Modified
    }
}

enum Item<'a> {
    Package(&'a PackageNode),
    Class(&'a ClassUnit),
    Method(&'a MethodDecl),
}

struct Flat<'a> {
    parent: Option<EntityKey>,
    item: Item<'a>,
}

fn flatten(s: &StructuralSnapshot) -> BTreeMap<EntityKey, Flat<'_>> {
    fn class<'a>(c: &'a ClassUnit, parent: Option<EntityKey>, out: &mut BTreeMap<EntityKey, Flat<'a>>) {
        let key = EntityKey::class(&c.fqn);
        for m in &c.methods {
            out.insert(EntityKey::method(&c.fqn, &m.signature()), Flat { parent: Some(key.clone()), item: Item::Method(m) });
        }
        for n in &c.nested_classes {
            class(n, Some(key.clone()), out);
        }
        out.insert(key, Flat { parent, item: Item::Class(c) });
    }
    fn package<'a>(p: &'a PackageNode, prefix: &str, parent: Option<EntityKey>, out: &mut BTreeMap<EntityKey, Flat<'a>>) {
        let path = join_path(prefix, &p.name);
        // the default package has no entity of its own
        let key = (!path.is_empty()).then(|| EntityKey::package(&path));
        for c in &p.classes {
            class(c, key.clone(), out);
        }
        for s in &p.subpackages {
            package(s, &path, key.clone(), out);
        }
        if let Some(k) = key {
            out.insert(k, Flat { parent, item: Item::Package(p) });
        }
    }
    let mut out = BTreeMap::new();
    for p in &s.root_packages {
        package(p, "", None, &mut out);
    }
    out
}

fn metrics(item: &Item<'_>) -> EntityMetrics {
    match item {
        Item::Package(p) => {
            let mut loc = LocMetrics::default();
            let mut methods = 0;
            p.walk_classes(&mut |c| {
                methods += c.methods.len() as u32;
            });
            // top-level classes already include their nested lines
            fn top(p: &PackageNode, loc: &mut LocMetrics) {
                for c in &p.classes {
                    loc.code_lines += c.loc.code_lines;
                    loc.comment_lines += c.loc.comment_lines;
                    loc.blank_lines += c.loc.blank_lines;
                }
                for s in &p.subpackages {
                    top(s, loc);
                }
            }
            top(p, &mut loc);
            EntityMetrics { loc, method_count: methods }
        }
        Item::Class(c) => EntityMetrics { loc: c.loc, method_count: c.methods.len() as u32 },
        Item::Method(m) => EntityMetrics { loc: m.loc, method_count: 0 },
    }
}

/// Keyed diff of two snapshots of the same application. Renames show up as
/// a deletion plus an addition. A package present on both sides is modified
/// iff some descendant is not unchanged.
pub fn diff_structures(base: &StructuralSnapshot, target: &StructuralSnapshot) -> Result<StructuralDiff, CompareError> {
    if base.commit_ref.application != target.commit_ref.application {
        return Err(CompareError::Contract(format!(
            "cannot compare applications {} and {}",
            base.commit_ref.application, target.commit_ref.application
        )));
    }
    let b = flatten(base);
    let t = flatten(target);
    let keys: BTreeSet<&EntityKey> = b.keys().chain(t.keys()).collect();
    let mut out = StructuralDiff::new();
    for key in keys {
        let bf = b.get(key);
        let tf = t.get(key);
        let status = match (bf.map(|f| &f.item), tf.map(|f| &f.item)) {
            (Some(Item::Class(x)), Some(Item::Class(y))) => classify_class(Some(x), Some(y))?,
            (Some(Item::Method(x)), Some(Item::Method(y))) => classify_method(x, y),
            (Some(_), Some(_)) => ChangeStatus::Unchanged, // packages: rolled up below
            (None, Some(_)) => ChangeStatus::Added,
            (Some(_), None) => ChangeStatus::Deleted,
            (None, None) => unreachable!(),
        };
        let parent = tf.or(bf).and_then(|f| f.parent.clone());
        out.insert(
            key.clone(),
            StructuralEntry { status, parent, base: bf.map(|f| metrics(&f.item)), target: tf.map(|f| metrics(&f.item)) },
        );
    }
    roll_up(&mut out);
    Ok(out)
}

/// Marks packages present on both sides as modified when any descendant
/// changed.
pub(crate) fn roll_up(diff: &mut StructuralDiff) {
    let changed: Vec<EntityKey> =
        diff.iter().filter(|(_, e)| e.status != ChangeStatus::Unchanged).map(|(k, _)| k.clone()).collect();
    for k in changed {
        let mut cur = diff.get(&k).and_then(|e| e.parent.clone());
        while let Some(p) = cur {
            let Some(e) = diff.get_mut(&p) else { break };
            if e.status == ChangeStatus::Unchanged && p.kind == EntityKind::Package {
                e.status = ChangeStatus::Modified;
            }
            cur = e.parent.clone();
        }
    }
}

//! Brute-force reference computations, written without the library's
//! helpers.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use codecity::agent::StructuralSnapshot;
use codecity::compare::{ChangeStatus, ComparisonModel, EntityKind};
use codecity::layout::CityLayout;
use codecity::model::{ClassUnit, PackageNode};
use codecity::trace::{EdgeKey, SpanRecord, WINDOW_NS};

#[derive(Debug, Clone, PartialEq, Eq)]
struct ClassFacts {
    kind: String,
    super_class: Option<String>,
    interfaces: BTreeSet<String>,
    signatures: BTreeSet<String>,
    code: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct MethodFacts {
    modifiers: BTreeSet<String>,
    code: u32,
}

#[derive(Default)]
struct Facts {
    packages: BTreeSet<String>,
    classes: BTreeMap<String, (String, ClassFacts)>,
    methods: BTreeMap<String, (String, MethodFacts)>,
}

fn sig(name: &str, params: &[String], ret: &str) -> String {
    let strip = |s: &str| s.chars().filter(|c| !c.is_whitespace()).collect::<String>();
    format!("{}({}):{}", name, params.iter().map(|p| strip(p)).collect::<Vec<_>>().join(","), strip(ret))
}

fn facts(s: &StructuralSnapshot) -> Facts {
    fn class(c: &ClassUnit, pkg: &str, f: &mut Facts) {
        let sigs: BTreeSet<String> = c.methods.iter().map(|m| sig(&m.name, &m.param_types, &m.return_type)).collect();
        for m in &c.methods {
            f.methods.insert(
                format!("{}#{}", c.fqn, sig(&m.name, &m.param_types, &m.return_type)),
                (pkg.to_string(), MethodFacts { modifiers: m.modifiers.clone(), code: m.loc.code_lines }),
            );
        }
        f.classes.insert(
            c.fqn.clone(),
            (
                pkg.to_string(),
                ClassFacts {
                    kind: format!("{:?}", c.kind),
                    super_class: c.super_class.clone(),
                    interfaces: c.interfaces.iter().cloned().collect(),
                    signatures: sigs,
                    code: c.loc.code_lines,
                },
            ),
        );
        for n in &c.nested_classes {
            class(n, pkg, f);
        }
    }
    fn package(p: &PackageNode, prefix: &str, f: &mut Facts) {
        let path = match (prefix.is_empty(), p.name.is_empty()) {
            (true, _) => p.name.clone(),
            (false, true) => prefix.to_string(),
            (false, false) => format!("{prefix}.{}", p.name),
        };
        if !path.is_empty() {
            f.packages.insert(path.clone());
        }
        for c in &p.classes {
            class(c, &path, f);
        }
        for s in &p.subpackages {
            package(s, &path, f);
        }
    }
    let mut f = Facts::default();
    for p in &s.root_packages {
        package(p, "", &mut f);
    }
    f
}

fn presence<T>(b: Option<T>, t: Option<T>, same: impl Fn(T, T) -> bool) -> ChangeStatus {
    match (b, t) {
        (Some(x), Some(y)) => {
            if same(x, y) {
                ChangeStatus::Unchanged
            } else {
                ChangeStatus::Modified
            }
        }
        (None, Some(_)) => ChangeStatus::Added,
        (Some(_), None) => ChangeStatus::Deleted,
        (None, None) => unreachable!(),
    }
}

fn under(location: &str, package: &str) -> bool {
    location == package || location.starts_with(&format!("{package}."))
}

/// Expected status of every entity, keyed by (kind, id).
pub fn diff_oracle(base: &StructuralSnapshot, target: &StructuralSnapshot) -> BTreeMap<(EntityKind, String), ChangeStatus> {
    let b = facts(base);
    let t = facts(target);
    let mut out = BTreeMap::new();
    // (location package, status) of every non-package entity and every package
    let mut located: Vec<(String, ChangeStatus)> = Vec::new();
    for fqn in b.classes.keys().chain(t.classes.keys()).collect::<BTreeSet<_>>() {
        let (bp, tp) = (b.classes.get(fqn), t.classes.get(fqn));
        let st = presence(bp.map(|x| &x.1), tp.map(|x| &x.1), |x, y| x == y);
        located.push((bp.or(tp).unwrap().0.clone(), st));
        out.insert((EntityKind::Class, fqn.clone()), st);
    }
    for id in b.methods.keys().chain(t.methods.keys()).collect::<BTreeSet<_>>() {
        let (bp, tp) = (b.methods.get(id), t.methods.get(id));
        let st = presence(bp.map(|x| &x.1), tp.map(|x| &x.1), |x, y| x == y);
        located.push((bp.or(tp).unwrap().0.clone(), st));
        out.insert((EntityKind::Method, id.clone()), st);
    }
    let all: BTreeSet<&String> = b.packages.iter().chain(t.packages.iter()).collect();
    let mut pkg_status: BTreeMap<String, ChangeStatus> = BTreeMap::new();
    for p in &all {
        let st = presence(b.packages.get(*p), t.packages.get(*p), |_, _| true);
        pkg_status.insert((*p).clone(), st);
    }
    for (p, st) in &pkg_status {
        let mut final_st = *st;
        if *st == ChangeStatus::Unchanged {
            let entity_changed = located.iter().any(|(loc, s)| *s != ChangeStatus::Unchanged && under(loc, p));
            let sub_changed = pkg_status
                .iter()
                .any(|(q, s)| q != p && under(q, p) && matches!(s, ChangeStatus::Added | ChangeStatus::Deleted));
            if entity_changed || sub_changed {
                final_st = ChangeStatus::Modified;
            }
        }
        out.insert((EntityKind::Package, p.clone()), final_st);
    }
    out
}

pub fn model_statuses(m: &ComparisonModel) -> BTreeMap<(EntityKind, String), ChangeStatus> {
    m.flatten().into_iter().map(|e| ((e.entity_kind, e.fqn.clone()), e.status)).collect()
}

/// Group-by reference for one window.
pub struct WindowCounts {
    pub class_instances: BTreeMap<String, u64>,
    pub method_calls: BTreeMap<(String, String), u64>,
    pub edges: BTreeMap<EdgeKey, u64>,
}

pub fn window_of(start_ns: i64) -> u64 {
    (start_ns / WINDOW_NS) as u64
}

pub fn aggregate_oracle(spans: &[SpanRecord], window: u64) -> WindowCounts {
    let by_id: HashMap<(&str, &str), &SpanRecord> =
        spans.iter().map(|s| ((s.trace_id.as_str(), s.span_id.as_str()), s)).collect();
    let mut calls: BTreeMap<&str, u64> = BTreeMap::new();
    let mut ids: BTreeMap<&str, HashSet<&str>> = BTreeMap::new();
    let mut method_calls = BTreeMap::new();
    let mut edges: BTreeMap<EdgeKey, u64> = BTreeMap::new();
    for s in spans.iter().filter(|s| window_of(s.start_ns) == window) {
        *calls.entry(&s.attrs.class).or_default() += 1;
        let e = ids.entry(&s.attrs.class).or_default();
        if let Some(i) = &s.attrs.instance_id {
            e.insert(i);
        }
        *method_calls.entry((s.attrs.class.clone(), s.attrs.method.clone())).or_default() += 1;
        if let Some(p) = s.parent_span_id.as_deref().and_then(|p| by_id.get(&(s.trace_id.as_str(), p))) {
            if p.attrs.class != s.attrs.class {
                *edges.entry(EdgeKey::new(&p.attrs.class, &p.attrs.method, &s.attrs.class, &s.attrs.method)).or_default() += 1;
            }
        }
    }
    let mut class_instances: BTreeMap<String, u64> = calls
        .iter()
        .map(|(c, n)| {
            let d = ids[c].len() as u64;
            (c.to_string(), if d > 0 { d } else { *n })
        })
        .collect();
    for k in edges.keys() {
        class_instances.entry(k.caller_class.clone()).or_insert(0);
        class_instances.entry(k.callee_class.clone()).or_insert(0);
    }
    WindowCounts { class_instances, method_calls, edges }
}

/// Parent span id per span for spans whose parent is present; spans whose
/// parent is missing are the expected orphans.
pub fn parent_map(spans: &[SpanRecord]) -> (BTreeMap<String, String>, BTreeSet<String>) {
    let ids: HashSet<&str> = spans.iter().map(|s| s.span_id.as_str()).collect();
    let mut parents = BTreeMap::new();
    let mut orphans = BTreeSet::new();
    for s in spans {
        match &s.parent_span_id {
            Some(p) if ids.contains(p.as_str()) => {
                parents.insert(s.span_id.clone(), p.clone());
            }
            Some(_) => {
                orphans.insert(s.span_id.clone());
            }
            None => {}
        }
    }
    (parents, orphans)
}

/// (kind, fqn, enclosing district) of one laid-out entity.
type Expected = (EntityKind, String, Option<(EntityKind, String)>);

/// Checks sibling disjointness, containment within padded parents, slab
/// stacking and anchor placement. Returns the first violation.
pub fn check_layout(m: &ComparisonModel, layout: &CityLayout, padding: f64, slab: f64) -> Result<(), String> {
    // expected parent item (by index into layout.items) for every item
    let mut expected: Vec<Expected> = Vec::new();
    fn walk(
        e: &codecity::compare::ComparedEntity,
        district: Option<(EntityKind, String)>,
        out: &mut Vec<Expected>,
    ) {
        match e.entity_kind {
            EntityKind::Package => {
                out.push((EntityKind::Package, e.fqn.clone(), district));
                let me = Some((EntityKind::Package, e.fqn.clone()));
                for c in &e.children {
                    walk(c, me.clone(), out);
                }
            }
            EntityKind::Class => {
                out.push((EntityKind::Class, e.fqn.clone(), district.clone()));
                for c in &e.children {
                    walk(c, district.clone(), out);
                }
            }
            EntityKind::Method => {}
        }
    }
    for e in &m.entities {
        walk(e, None, &mut expected);
    }
    if expected.len() != layout.items.len() {
        return Err(format!("{} layout items for {} laid-out entities", layout.items.len(), expected.len()));
    }
    let index: HashMap<(EntityKind, &str), usize> =
        layout.items.iter().enumerate().map(|(i, it)| ((it.entity_kind, it.fqn.as_str()), i)).collect();
    if index.len() != layout.items.len() {
        return Err("duplicate layout item".into());
    }
    let mut siblings: BTreeMap<Option<usize>, Vec<usize>> = BTreeMap::new();
    for (kind, fqn, parent) in &expected {
        let &i = index.get(&(*kind, fqn.as_str())).ok_or_else(|| format!("no item for {fqn}"))?;
        let item = &layout.items[i];
        if item.height < 0.0 || item.rect.width <= 0.0 || item.rect.depth <= 0.0 {
            return Err(format!("{fqn}: degenerate geometry"));
        }
        let p = match parent {
            Some((pk, pf)) => Some(*index.get(&(*pk, pf.as_str())).ok_or_else(|| format!("no parent item {pf}"))?),
            None => None,
        };
        if let Some(p) = p {
            let pr = &layout.items[p].rect;
            let r = &item.rect;
            let eps = 1e-9;
            if r.x < pr.x + padding - eps
                || r.z < pr.z + padding - eps
                || r.x + r.width > pr.x + pr.width - padding + eps
                || r.z + r.depth > pr.z + pr.depth - padding + eps
            {
                return Err(format!("{fqn} escapes its district {}", layout.items[p].fqn));
            }
            let want = layout.items[p].base_y + slab;
            if (item.base_y - want).abs() > 1e-9 {
                return Err(format!("{fqn} floats at {} instead of {want}", item.base_y));
            }
        } else if item.base_y != 0.0 {
            return Err(format!("top-level {fqn} is not on the ground"));
        }
        siblings.entry(p).or_default().push(i);
    }
    for group in siblings.values() {
        for (n, &a) in group.iter().enumerate() {
            for &b in &group[n + 1..] {
                let (x, y) = (&layout.items[a].rect, &layout.items[b].rect);
                let disjoint = x.x + x.width <= y.x || y.x + y.width <= x.x || x.z + x.depth <= y.z || y.z + y.depth <= x.z;
                if !disjoint {
                    return Err(format!("{} overlaps {}", layout.items[a].fqn, layout.items[b].fqn));
                }
            }
        }
    }
    for a in &layout.edge_anchors {
        for (end, class) in [(a.from, &a.edge_key.caller_class), (a.to, &a.edge_key.callee_class)] {
            let &i = index.get(&(EntityKind::Class, class.as_str())).ok_or_else(|| format!("anchor to missing {class}"))?;
            let it = &layout.items[i];
            let roof = [it.rect.x + it.rect.width / 2.0, it.base_y + it.height, it.rect.z + it.rect.depth / 2.0];
            if end != roof {
                return Err(format!("anchor for {class} is not on its roof"));
            }
        }
        if a.weight.is_nan() || a.weight <= 0.0 {
            return Err(format!("anchor {} has weight {}", a.edge_key, a.weight));
        }
    }
    Ok(())
}

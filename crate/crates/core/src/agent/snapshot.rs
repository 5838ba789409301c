use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::parser::CompilationUnit;
use super::AgentError;
use crate::model::{ClassUnit, CommitRef, LocMetrics, PackageNode};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub loc: LocMetrics,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AnalysisWarning {
    pub path: String,
    pub reason: String,
}

/// The complete package / class / method tree of one commit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuralSnapshot {
    pub commit_ref: CommitRef,
    pub root_packages: Vec<PackageNode>,
    pub files: Vec<FileEntry>,
    pub warnings: Vec<AnalysisWarning>,
    pub analyzed_at_ms: i64,
}

impl StructuralSnapshot {
    pub fn walk_classes<'a>(&'a self, f: &mut dyn FnMut(&'a ClassUnit)) {
        for p in &self.root_packages {
            p.walk_classes(f);
        }
    }

    pub fn classes(&self) -> Vec<&ClassUnit> {
        let mut out = Vec::new();
        self.walk_classes(&mut |c| out.push(c));
        out
    }

    pub fn class_count(&self) -> usize {
        let mut n = 0;
        self.walk_classes(&mut |_| n += 1);
        n
    }

    pub fn method_count(&self) -> usize {
        let mut n = 0;
        self.walk_classes(&mut |c| n += c.methods.len());
        n
    }

    /// Dot-joined paths of every package node. The default package (empty
    /// name) is not listed.
    pub fn package_paths(&self) -> Vec<String> {
        let mut out = Vec::new();
        for p in &self.root_packages {
            p.walk_packages("", &mut |path, _| {
                if !path.is_empty() {
                    out.push(path.to_string());
                }
            });
        }
        out
    }
}

pub(crate) fn now_ms() -> i64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis() as i64)
        .unwrap_or_default()
}

/// Merges parsed units into one package tree and resolves supertype names.
///
/// Resolution order for a written name: enclosing types of the declaring
/// class, explicit single-type imports, same-package types, a fully
/// qualified known name, then wildcard imports when exactly one imported
/// package holds the name. Anything else is stored as written and recorded in
/// the unit's `unresolved_type_names`.
pub fn build_snapshot(units: &mut [CompilationUnit], commit_ref: CommitRef) -> Result<StructuralSnapshot, AgentError> {
    let mut owner: HashMap<String, String> = HashMap::new();
    for u in units.iter() {
        for t in &u.top_level_types {
            let mut dup = None;
            t.walk(&mut |c| {
                if dup.is_some() {
                    return;
                }
                if let Some(first) = owner.insert(c.fqn.clone(), u.path.clone()) {
                    dup = Some((c.fqn.clone(), first));
                }
            });
            if let Some((fqn, first)) = dup {
                return Err(AgentError::SnapshotConflict { fqn, first_path: first, second_path: u.path.clone() });
            }
        }
    }
    let known: BTreeSet<String> = owner.keys().cloned().collect();

    for u in units.iter_mut() {
        let resolver = Resolver { known: &known, package: &u.package_path, imports: &u.imports };
        let mut unresolved = BTreeSet::new();
        for t in &mut u.top_level_types {
            resolve_class(t, &[], &resolver, &mut unresolved);
        }
        u.unresolved_type_names = unresolved;
    }

    let mut root = PackageNode::new("");
    let mut files = Vec::new();
    let mut warnings = Vec::new();
    for u in units.iter() {
        files.push(FileEntry { path: u.path.clone(), loc: u.loc });
        for w in &u.warnings {
            warnings.push(AnalysisWarning { path: u.path.clone(), reason: w.clone() });
        }
        let node = package_node(&mut root, &u.package_path);
        node.classes.extend(u.top_level_types.iter().cloned());
    }
    sort_tree(&mut root);
    files.sort_by(|a, b| a.path.cmp(&b.path));
    warnings.sort();

    // the default package lives in a root node with an empty name
    let mut root_packages = std::mem::take(&mut root.subpackages);
    if !root.classes.is_empty() {
        root_packages.insert(0, PackageNode { name: String::new(), subpackages: Vec::new(), classes: root.classes });
    }
    Ok(StructuralSnapshot { commit_ref, root_packages, files, warnings, analyzed_at_ms: now_ms() })
}

fn package_node<'a>(root: &'a mut PackageNode, path: &str) -> &'a mut PackageNode {
    let mut node = root;
    if path.is_empty() {
        return node;
    }
    for seg in path.split('.') {
        let idx = match node.subpackages.iter().position(|p| p.name == seg) {
            Some(i) => i,
            None => {
                node.subpackages.push(PackageNode::new(seg));
                node.subpackages.len() - 1
            }
        };
        node = &mut node.subpackages[idx];
    }
    node
}

pub(crate) fn sort_tree(p: &mut PackageNode) {
    p.subpackages.sort_by(|a, b| a.name.cmp(&b.name));
    p.classes.sort_by(|a, b| a.fqn.cmp(&b.fqn));
    for c in &mut p.classes {
        sort_class(c);
    }
    for s in &mut p.subpackages {
        sort_tree(s);
    }
}

pub(crate) fn sort_class(c: &mut ClassUnit) {
    c.methods.sort_by_cached_key(crate::model::signature_of);
    c.nested_classes.sort_by(|a, b| a.fqn.cmp(&b.fqn));
    for n in &mut c.nested_classes {
        sort_class(n);
    }
}

struct Resolver<'a> {
    known: &'a BTreeSet<String>,
    package: &'a str,
    imports: &'a [String],
}

impl Resolver<'_> {
    fn resolve(&self, name: &str, enclosing: &[String]) -> Option<String> {
        for outer in enclosing.iter().rev() {
            let cand = format!("{outer}.{name}");
            if self.known.contains(&cand) {
                return Some(cand);
            }
        }
        let (first, rest) = match name.split_once('.') {
            Some((f, r)) => (f, Some(r)),
            None => (name, None),
        };
        for imp in self.imports {
            if imp.starts_with("static ") || imp.ends_with(".*") {
                continue;
            }
            if imp.rsplit('.').next() == Some(first) {
                return Some(match rest {
                    Some(r) => format!("{imp}.{r}"),
                    None => imp.clone(),
                });
            }
        }
        let same = if self.package.is_empty() { name.to_string() } else { format!("{}.{name}", self.package) };
        if self.known.contains(&same) {
            return Some(same);
        }
        if self.known.contains(name) {
            return Some(name.to_string());
        }
        let mut found: BTreeMap<&str, String> = BTreeMap::new();
        for imp in self.imports {
            if let Some(pkg) = imp.strip_suffix(".*") {
                if imp.starts_with("static ") {
                    continue;
                }
                let cand = format!("{pkg}.{name}");
                if self.known.contains(&cand) {
                    found.insert(pkg, cand);
                }
            }
        }
        if found.len() == 1 {
            return found.into_values().next();
        }
        None
    }
}

fn resolve_class(c: &mut ClassUnit, enclosing: &[String], r: &Resolver<'_>, unresolved: &mut BTreeSet<String>) {
    let mut fix = |name: &mut String| match r.resolve(name, enclosing) {
        Some(fqn) => *name = fqn,
        None => {
            unresolved.insert(name.clone());
        }
    };
    if let Some(s) = c.super_class.as_mut() {
        fix(s);
    }
    for i in &mut c.interfaces {
        fix(i);
    }
    let mut inner = enclosing.to_vec();
    inner.push(c.fqn.clone());
    for n in &mut c.nested_classes {
        resolve_class(n, &inner, r, unresolved);
    }
}

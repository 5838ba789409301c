//! The `codecity-structure/1` transport document.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::snapshot::{sort_tree, AnalysisWarning, FileEntry, StructuralSnapshot};
use crate::model::{ClassKind, ClassUnit, CommitRef, LocMetrics, MethodDecl, PackageNode};

pub const STRUCTURE_SCHEMA: &str = "codecity-structure/1";

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema {0:?}")]
    Schema(String),
    #[error("invalid document: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct StructureDocument {
    pub schema: String,
    pub application: String,
    pub commit: String,
    pub branch: String,
    pub parent_commit: Option<String>,
    pub analyzed_at_ms: i64,
    pub files: Vec<FileDoc>,
    pub packages: Vec<PackageDoc>,
    pub warnings: Vec<WarningDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileDoc {
    pub path: String,
    pub loc: LocMetrics,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WarningDoc {
    pub path: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PackageDoc {
    pub name: String,
    pub subpackages: Vec<PackageDoc>,
    pub classes: Vec<ClassDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ClassDoc {
    pub name: String,
    pub fqn: String,
    pub kind: ClassKind,
    pub super_class: Option<String>,
    pub interfaces: Vec<String>,
    pub file_path: String,
    pub loc: LocMetrics,
    pub methods: Vec<MethodDoc>,
    pub nested: Vec<ClassDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodDoc {
    pub name: String,
    pub params: Vec<String>,
    pub returns: String,
    pub modifiers: BTreeSet<String>,
    pub loc: LocMetrics,
}

impl From<&MethodDecl> for MethodDoc {
    fn from(m: &MethodDecl) -> Self {
        MethodDoc {
            name: m.name.clone(),
            params: m.param_types.clone(),
            returns: m.return_type.clone(),
            modifiers: m.modifiers.clone(),
            loc: m.loc,
        }
    }
}

impl From<MethodDoc> for MethodDecl {
    fn from(m: MethodDoc) -> Self {
        MethodDecl { name: m.name, param_types: m.params, return_type: m.returns, modifiers: m.modifiers, loc: m.loc }
    }
}

fn class_doc(c: &ClassUnit) -> ClassDoc {
    ClassDoc {
        name: c.name.clone(),
        fqn: c.fqn.clone(),
        kind: c.kind,
        super_class: c.super_class.clone(),
        interfaces: c.interfaces.clone(),
        file_path: c.file_path.clone(),
        loc: c.loc,
        methods: c.methods.iter().map(MethodDoc::from).collect(),
        nested: c.nested_classes.iter().map(class_doc).collect(),
    }
}

fn class_unit(c: ClassDoc) -> ClassUnit {
    ClassUnit {
        name: c.name,
        fqn: c.fqn,
        kind: c.kind,
        super_class: c.super_class,
        interfaces: c.interfaces,
        methods: c.methods.into_iter().map(MethodDecl::from).collect(),
        nested_classes: c.nested.into_iter().map(class_unit).collect(),
        file_path: c.file_path,
        loc: c.loc,
    }
}

fn package_doc(p: &PackageNode) -> PackageDoc {
    PackageDoc {
        name: p.name.clone(),
        subpackages: p.subpackages.iter().map(package_doc).collect(),
        classes: p.classes.iter().map(class_doc).collect(),
    }
}

fn package_node(p: PackageDoc) -> PackageNode {
    PackageNode {
        name: p.name,
        subpackages: p.subpackages.into_iter().map(package_node).collect(),
        classes: p.classes.into_iter().map(class_unit).collect(),
    }
}

impl StructureDocument {
    pub fn from_snapshot(s: &StructuralSnapshot) -> Self {
        // canonical sibling ordering
        let mut root = PackageNode { name: String::new(), subpackages: s.root_packages.clone(), classes: Vec::new() };
        sort_tree(&mut root);
        let mut files: Vec<FileDoc> = s.files.iter().map(|f| FileDoc { path: f.path.clone(), loc: f.loc }).collect();
        files.sort_by(|a, b| a.path.cmp(&b.path));
        let mut warnings: Vec<WarningDoc> =
            s.warnings.iter().map(|w| WarningDoc { path: w.path.clone(), reason: w.reason.clone() }).collect();
        warnings.sort_by(|a, b| (&a.path, &a.reason).cmp(&(&b.path, &b.reason)));
        StructureDocument {
            schema: STRUCTURE_SCHEMA.to_string(),
            application: s.commit_ref.application.clone(),
            commit: s.commit_ref.commit.clone(),
            branch: s.commit_ref.branch.clone(),
            parent_commit: s.commit_ref.parent_commit.clone(),
            analyzed_at_ms: s.analyzed_at_ms,
            files,
            packages: root.subpackages.iter().map(package_doc).collect(),
            warnings,
        }
    }

    /// Validates the document and converts it into a snapshot.
    pub fn into_snapshot(self) -> Result<StructuralSnapshot, DocumentError> {
        if self.schema != STRUCTURE_SCHEMA {
            return Err(DocumentError::Schema(self.schema));
        }
        let commit_ref = CommitRef {
            application: self.application,
            branch: self.branch,
            commit: self.commit,
            parent_commit: self.parent_commit,
        };
        commit_ref.validate().map_err(|e| DocumentError::Invalid(e.to_string()))?;
        let snapshot = StructuralSnapshot {
            commit_ref,
            root_packages: self.packages.into_iter().map(package_node).collect(),
            files: self.files.into_iter().map(|f| FileEntry { path: f.path, loc: f.loc }).collect(),
            warnings: self.warnings.into_iter().map(|w| AnalysisWarning { path: w.path, reason: w.reason }).collect(),
            analyzed_at_ms: self.analyzed_at_ms,
        };
        validate_snapshot(&snapshot)?;
        Ok(snapshot)
    }
}

fn validate_snapshot(s: &StructuralSnapshot) -> Result<(), DocumentError> {
    let files: HashSet<&str> = s.files.iter().map(|f| f.path.as_str()).collect();
    let mut seen = HashSet::new();
    let mut problem = None;
    s.walk_classes(&mut |c| {
        if problem.is_some() {
            return;
        }
        if !seen.insert(c.fqn.as_str()) {
            problem = Some(format!("duplicate class fqn {}", c.fqn));
        } else if !files.contains(c.file_path.as_str()) {
            problem = Some(format!("class {} refers to unlisted file {}", c.fqn, c.file_path));
        } else if c.name.is_empty() || !c.fqn.ends_with(&c.name) {
            problem = Some(format!("class {} has inconsistent name {:?}", c.fqn, c.name));
        } else {
            let mut sigs = HashSet::new();
            for m in &c.methods {
                if !sigs.insert(m.signature()) {
                    problem = Some(format!("duplicate method {} in {}", m.signature(), c.fqn));
                }
            }
        }
    });
    for root in &s.root_packages {
        root.walk_packages("", &mut |path, p| {
            let mut names = HashSet::new();
            for sub in &p.subpackages {
                if sub.name.is_empty() || !names.insert(sub.name.as_str()) {
                    problem.get_or_insert(format!("invalid subpackage {:?} under {path:?}", sub.name));
                }
            }
        });
    }
    let mut roots = HashSet::new();
    for r in &s.root_packages {
        if !roots.insert(r.name.as_str()) {
            problem.get_or_insert(format!("duplicate root package {:?}", r.name));
        }
    }
    match problem {
        Some(p) => Err(DocumentError::Invalid(p)),
        None => Ok(()),
    }
}

/// Canonical bytes: sorted object keys, sorted sibling arrays.
pub fn emit_snapshot_document(s: &StructuralSnapshot) -> Vec<u8> {
    let doc = StructureDocument::from_snapshot(s);
    // serde_json's default map is ordered by key
    let value = serde_json::to_value(&doc).expect("structure document is always serializable");
    serde_json::to_vec(&value).expect("json value is always serializable")
}

pub fn parse_snapshot_document(bytes: &[u8]) -> Result<StructuralSnapshot, DocumentError> {
    let doc: StructureDocument = serde_json::from_slice(bytes)?;
    doc.into_snapshot()
}

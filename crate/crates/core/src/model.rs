//! Shared domain vocabulary: commits, structural entities and identifiers.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid identifier: {0:?}")]
    InvalidIdentifier(String),
    #[error("invalid commit hash {0:?}: expected 40 lowercase hex characters")]
    InvalidCommit(String),
    #[error("invalid application name {0:?}")]
    InvalidApplication(String),
    #[error("invalid branch name {0:?}")]
    InvalidBranch(String),
}

/// Returns true for a 40 character lowercase hex string.
pub fn is_commit_hash(s: &str) -> bool {
    is_lower_hex(s, 40)
}

pub(crate) fn is_lower_hex(s: &str, len: usize) -> bool {
    s.len() == len && s.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
}

/// A validated application name: non-empty, no path separators, no
/// whitespace or control characters, not `.` or `..`.
pub fn validate_application(app: &str) -> Result<(), ModelError> {
    if app.is_empty()
        || app == "."
        || app == ".."
        || app.contains(['/', '\\'])
        || app.chars().any(|c| c.is_whitespace() || c.is_control())
    {
        return Err(ModelError::InvalidApplication(app.to_string()));
    }
    Ok(())
}

/// Identifies one analyzed commit of one application.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CommitRef {
    pub application: String,
    pub branch: String,
    pub commit: String,
    pub parent_commit: Option<String>,
}

impl CommitRef {
    pub fn new(
        application: impl Into<String>,
        branch: impl Into<String>,
        commit: impl Into<String>,
        parent_commit: Option<String>,
    ) -> Result<Self, ModelError> {
        let r = CommitRef {
            application: application.into(),
            branch: branch.into(),
            commit: commit.into(),
            parent_commit,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        validate_application(&self.application)?;
        if self.branch.is_empty() {
            return Err(ModelError::InvalidBranch(self.branch.clone()));
        }
        if !is_commit_hash(&self.commit) {
            return Err(ModelError::InvalidCommit(self.commit.clone()));
        }
        if let Some(p) = &self.parent_commit {
            if !is_commit_hash(p) {
                return Err(ModelError::InvalidCommit(p.clone()));
            }
        }
        Ok(())
    }
}

impl fmt::Display for CommitRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.application, self.commit)
    }
}

/// Line counts for a region of source text.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LocMetrics {
    #[serde(rename = "code")]
    pub code_lines: u32,
    #[serde(rename = "comment")]
    pub comment_lines: u32,
    #[serde(rename = "blank")]
    pub blank_lines: u32,
}

impl LocMetrics {
    pub fn total(&self) -> u32 {
        self.code_lines + self.comment_lines + self.blank_lines
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassKind {
    Class,
    Abstract,
    Interface,
    Enum,
}

impl ClassKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassKind::Class => "class",
            ClassKind::Abstract => "abstract",
            ClassKind::Interface => "interface",
            ClassKind::Enum => "enum",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodDecl {
    pub name: String,
    pub param_types: Vec<String>,
    pub return_type: String,
    pub modifiers: BTreeSet<String>,
    pub loc: LocMetrics,
}

impl MethodDecl {
    pub fn signature(&self) -> String {
        signature_of(self)
    }
}

/// Name used for constructors in method lists.
pub const CONSTRUCTOR_NAME: &str = "<init>";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassUnit {
    pub name: String,
    pub fqn: String,
    pub kind: ClassKind,
    pub super_class: Option<String>,
    pub interfaces: Vec<String>,
    pub methods: Vec<MethodDecl>,
    pub nested_classes: Vec<ClassUnit>,
    pub file_path: String,
    pub loc: LocMetrics,
}

impl ClassUnit {
    /// Visits this class and every nested class, depth first.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a ClassUnit)) {
        f(self);
        for n in &self.nested_classes {
            n.walk(f);
        }
    }

    pub fn signatures(&self) -> BTreeSet<String> {
        self.methods.iter().map(signature_of).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PackageNode {
    pub name: String,
    pub subpackages: Vec<PackageNode>,
    pub classes: Vec<ClassUnit>,
}

impl PackageNode {
    pub fn new(name: impl Into<String>) -> Self {
        PackageNode {
            name: name.into(),
            ..Default::default()
        }
    }

    /// Visits every class (including nested ones) below this package.
    pub fn walk_classes<'a>(&'a self, f: &mut dyn FnMut(&'a ClassUnit)) {
        for c in &self.classes {
            c.walk(f);
        }
        for p in &self.subpackages {
            p.walk_classes(f);
        }
    }

    /// Visits every package with its dot-joined path.
    pub fn walk_packages<'a>(&'a self, prefix: &str, f: &mut dyn FnMut(&str, &'a PackageNode)) {
        let path = join_path(prefix, &self.name);
        f(&path, self);
        for p in &self.subpackages {
            p.walk_packages(&path, f);
        }
    }
}

pub(crate) fn join_path(prefix: &str, name: &str) -> String {
    if prefix.is_empty() {
        name.to_string()
    } else if name.is_empty() {
        prefix.to_string()
    } else {
        format!("{prefix}.{name}")
    }
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' || c == '$' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || c == '_' || c == '$')
}

/// Builds a fully-qualified name from a package path, the enclosing type
/// names (outermost first) and a simple name.
pub fn make_fqn(package_path: &str, enclosing: &[&str], name: &str) -> Result<String, ModelError> {
    if !is_identifier(name) {
        return Err(ModelError::InvalidIdentifier(name.to_string()));
    }
    if !package_path.is_empty() && !package_path.split('.').all(is_identifier) {
        return Err(ModelError::InvalidIdentifier(package_path.to_string()));
    }
    if let Some(bad) = enclosing.iter().find(|e| !is_identifier(e)) {
        return Err(ModelError::InvalidIdentifier(bad.to_string()));
    }
    let mut out = String::from(package_path);
    for part in enclosing.iter().copied().chain(std::iter::once(name)) {
        if !out.is_empty() {
            out.push('.');
        }
        out.push_str(part);
    }
    Ok(out)
}

/// Canonical `name(p1,p2):ret` form keying methods within a class.
pub fn signature_of(m: &MethodDecl) -> String {
    let mut s = String::with_capacity(m.name.len() + 16);
    s.push_str(&m.name);
    s.push('(');
    for (i, p) in m.param_types.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.extend(p.chars().filter(|c| !c.is_whitespace()));
    }
    s.push_str("):");
    s.extend(m.return_type.chars().filter(|c| !c.is_whitespace()));
    s
}

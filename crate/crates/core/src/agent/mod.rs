//! The code agent: static structure extraction for one source tree at one
//! commit.

mod changes;
mod document;
mod lexer;
mod loc;
mod parser;
mod scan;
mod snapshot;

use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

pub use changes::{read_changed_paths, ChangeKind, ChangedPath, ChangedPathError};
pub use document::{
    emit_snapshot_document, parse_snapshot_document, ClassDoc, DocumentError, FileDoc, MethodDoc, PackageDoc,
    StructureDocument, WarningDoc, STRUCTURE_SCHEMA,
};
pub use loc::{classify_lines, compute_loc, file_loc, LineClass, LocRangeError};
pub use parser::{erase, parse_compilation_unit, CompilationUnit};
pub use scan::{scan_source_tree, SourceScan, DEFAULT_GLOB};
pub use snapshot::{build_snapshot, AnalysisWarning, FileEntry, StructuralSnapshot};

use crate::model::CommitRef;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid glob: {0}")]
    Glob(#[from] globset::Error),
    #[error("snapshot conflict: {fqn} declared in both {first_path} and {second_path}")]
    SnapshotConflict { fqn: String, first_path: String, second_path: String },
}

/// Output of a full tree analysis.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub snapshot: StructuralSnapshot,
    pub units: Vec<CompilationUnit>,
}

/// Scans, parses (in parallel) and merges every matching file under `root`.
/// Files that cannot be read are listed as warnings and contribute no types.
pub fn analyze_tree(root: &Path, include_globs: &[String], commit_ref: CommitRef) -> Result<Analysis, AgentError> {
    let scan = scan_source_tree(root, include_globs)?;
    let parsed: Vec<Result<CompilationUnit, (String, String)>> = scan
        .files
        .par_iter()
        .map(|rel| match std::fs::read(root.join(rel)) {
            Ok(bytes) => {
                let text = String::from_utf8_lossy(&bytes);
                let mut unit = parse_compilation_unit(&text, rel);
                if std::str::from_utf8(&bytes).is_err() {
                    unit.warnings.push("file is not valid UTF-8".into());
                }
                Ok(unit)
            }
            Err(e) => Err((rel.clone(), format!("unreadable: {e}"))),
        })
        .collect();
    let mut units = Vec::with_capacity(parsed.len());
    let mut extra = scan.warnings;
    for p in parsed {
        match p {
            Ok(u) => units.push(u),
            Err(w) => extra.push(w),
        }
    }
    let mut snapshot = build_snapshot(&mut units, commit_ref)?;
    snapshot.warnings.extend(extra.into_iter().map(|(path, reason)| AnalysisWarning { path, reason }));
    snapshot.warnings.sort();
    Ok(Analysis { snapshot, units })
}

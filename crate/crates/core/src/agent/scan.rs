use std::path::Path;

use globset::{GlobBuilder, GlobSet, GlobSetBuilder};
use walkdir::WalkDir;

use super::AgentError;

pub const DEFAULT_GLOB: &str = "**/*.java";

/// Result of walking a source tree.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceScan {
    /// Repository-relative paths with `/` separators, lexicographically sorted.
    pub files: Vec<String>,
    /// Entries that could not be read, with the reason.
    pub warnings: Vec<(String, String)>,
}

fn glob_set(globs: &[String]) -> Result<GlobSet, AgentError> {
    let mut b = GlobSetBuilder::new();
    if globs.is_empty() {
        b.add(GlobBuilder::new(DEFAULT_GLOB).literal_separator(true).build()?);
    }
    for g in globs {
        b.add(GlobBuilder::new(g).literal_separator(true).build()?);
    }
    Ok(b.build()?)
}

/// Lists the source files under `root` matching `include_globs`
/// (default `**/*.java`). Symlinks are not followed.
pub fn scan_source_tree(root: &Path, include_globs: &[String]) -> Result<SourceScan, AgentError> {
    let meta = std::fs::metadata(root).map_err(|e| AgentError::Io { path: root.display().to_string(), source: e })?;
    if !meta.is_dir() {
        return Err(AgentError::Io {
            path: root.display().to_string(),
            source: std::io::Error::new(std::io::ErrorKind::InvalidInput, "not a directory"),
        });
    }
    std::fs::read_dir(root).map_err(|e| AgentError::Io { path: root.display().to_string(), source: e })?;
    let set = glob_set(include_globs)?;
    let mut scan = SourceScan::default();
    for entry in WalkDir::new(root).follow_links(false) {
        let entry = match entry {
            Ok(e) => e,
            Err(e) => {
                let path = e
                    .path()
                    .and_then(|p| p.strip_prefix(root).ok())
                    .map(relative)
                    .unwrap_or_default();
                scan.warnings.push((path, format!("unreadable: {e}")));
                continue;
            }
        };
        if !entry.file_type().is_file() {
            continue;
        }
        let Ok(rel) = entry.path().strip_prefix(root) else { continue };
        let rel = relative(rel);
        if set.is_match(&rel) {
            scan.files.push(rel);
        }
    }
    scan.files.sort();
    scan.warnings.sort();
    Ok(scan)
}

fn relative(p: &Path) -> String {
    p.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

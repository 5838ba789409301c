use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChangeKind {
    Added,
    Modified,
    Deleted,
}

impl ChangeKind {
    pub fn letter(self) -> char {
        match self {
            ChangeKind::Added => 'A',
            ChangeKind::Modified => 'M',
            ChangeKind::Deleted => 'D',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChangedPath {
    pub path: String,
    pub kind: ChangeKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ChangedPathError {
    pub line: usize,
    pub message: String,
}

/// Parses `git diff --name-status` output. Renames (`R<score>`) become a
/// deletion of the old path followed by an addition of the new one, and type
/// changes (`T`) count as modifications.
pub fn read_changed_paths(text: &str) -> Result<Vec<ChangedPath>, ChangedPathError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: &str| ChangedPathError { line: lineno, message: message.to_string() };
        let fields: Vec<&str> = line.split('\t').collect();
        let status = fields[0];
        let path = |idx: usize| -> Result<String, ChangedPathError> {
            match fields.get(idx) {
                Some(p) if !p.is_empty() => Ok(p.to_string()),
                _ => Err(err("missing path")),
            }
        };
        match status {
            "A" | "M" | "D" | "T" => {
                if fields.len() != 2 {
                    return Err(err("expected '<status>\\t<path>'"));
                }
                let kind = match status {
                    "A" => ChangeKind::Added,
                    "D" => ChangeKind::Deleted,
                    _ => ChangeKind::Modified,
                };
                out.push(ChangedPath { path: path(1)?, kind });
            }
            s if (s.starts_with('R') || s.starts_with('C')) && s[1..].chars().all(|c| c.is_ascii_digit()) => {
                if fields.len() != 3 {
                    return Err(err("expected '<status>\\t<old>\\t<new>'"));
                }
                if s.starts_with('R') {
                    out.push(ChangedPath { path: path(1)?, kind: ChangeKind::Deleted });
                }
                out.push(ChangedPath { path: path(2)?, kind: ChangeKind::Added });
            }
            other => return Err(err(&format!("unknown status {other:?}"))),
        }
    }
    Ok(out)
}

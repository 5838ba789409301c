//! Physical line classification into code, comment and blank lines.

use thiserror::Error;

use crate::model::LocMetrics;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line range {start}..={end} outside 1..={lines}")]
pub struct LocRangeError {
    pub start: u32,
    pub end: u32,
    pub lines: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineClass {
    Code,
    Comment,
    Blank,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Normal,
    Block,
    TextBlock,
}

/// Classifies every physical line of `text`.
///
/// A line is code when any non-whitespace character sits outside a comment,
/// comment when it only holds comment text or lies inside a `/* */` block,
/// and blank otherwise.
pub fn classify_lines(text: &str) -> Vec<LineClass> {
    let mut out = Vec::new();
    let mut state = State::Normal;
    for raw in text.lines() {
        let line: Vec<char> = raw.chars().collect();
        let mut has_code = false;
        let mut has_comment = state == State::Block;
        let mut i = 0;
        while i < line.len() {
            let c = line[i];
            match state {
                State::Block => {
                    has_comment = true;
                    if c == '*' && line.get(i + 1) == Some(&'/') {
                        state = State::Normal;
                        i += 2;
                    } else {
                        i += 1;
                    }
                }
                State::TextBlock => {
                    if !c.is_whitespace() {
                        has_code = true;
                    }
                    if c == '\\' {
                        i += 2;
                    } else if c == '"' && line.get(i + 1) == Some(&'"') && line.get(i + 2) == Some(&'"') {
                        state = State::Normal;
                        i += 3;
                    } else {
                        i += 1;
                    }
                }
                State::Normal => {
                    if c.is_whitespace() {
                        i += 1;
                    } else if c == '/' && line.get(i + 1) == Some(&'/') {
                        has_comment = true;
                        break;
                    } else if c == '/' && line.get(i + 1) == Some(&'*') {
                        has_comment = true;
                        state = State::Block;
                        i += 2;
                    } else if c == '"' && line.get(i + 1) == Some(&'"') && line.get(i + 2) == Some(&'"') {
                        has_code = true;
                        state = State::TextBlock;
                        i += 3;
                    } else if c == '"' || c == '\'' {
                        has_code = true;
                        i += 1;
                        while i < line.len() && line[i] != c {
                            if line[i] == '\\' {
                                i += 1;
                            }
                            i += 1;
                        }
                        i += 1;
                    } else {
                        has_code = true;
                        i += 1;
                    }
                }
            }
        }
        if state == State::TextBlock && line.iter().all(|c| c.is_whitespace()) {
            has_code = true;
        }
        out.push(if has_code {
            LineClass::Code
        } else if has_comment {
            LineClass::Comment
        } else {
            LineClass::Blank
        });
    }
    out
}

pub fn tally(lines: &[LineClass]) -> LocMetrics {
    let mut m = LocMetrics::default();
    for l in lines {
        match l {
            LineClass::Code => m.code_lines += 1,
            LineClass::Comment => m.comment_lines += 1,
            LineClass::Blank => m.blank_lines += 1,
        }
    }
    m
}

/// Line metrics for the inclusive, 1-based line range `start..=end`.
pub fn compute_loc(text: &str, start: u32, end: u32) -> Result<LocMetrics, LocRangeError> {
    let classes = classify_lines(text);
    range_loc(&classes, start, end)
}

pub fn range_loc(classes: &[LineClass], start: u32, end: u32) -> Result<LocMetrics, LocRangeError> {
    let lines = classes.len() as u32;
    if start < 1 || start > end || end > lines {
        return Err(LocRangeError { start, end, lines });
    }
    Ok(tally(&classes[(start - 1) as usize..end as usize]))
}

/// Metrics for the whole file; an empty file yields all zeros.
pub fn file_loc(text: &str) -> LocMetrics {
    tally(&classify_lines(text))
}

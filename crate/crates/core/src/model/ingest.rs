//! JSON Lines comment ingestion.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Serialize;

use super::{Comment, ModelError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

/// Parsed comments plus the lines that were skipped in lenient mode.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IngestReport {
    pub comments: Vec<Comment>,
    pub skipped: Vec<LineError>,
}

pub fn read_comments(path: &Path, strict: bool) -> Result<IngestReport, ModelError> {
    let file = File::open(path).map_err(|e| ModelError::Io(format!("{}: {e}", path.display())))?;
    read_comments_from(BufReader::new(file), strict)
}

/// Reads one comment per line. Blank lines are ignored, unknown fields are
/// tolerated. With `strict` the first bad line is fatal; otherwise bad lines
/// are collected into [`IngestReport::skipped`].
pub fn read_comments_from<R: BufRead>(reader: R, strict: bool) -> Result<IngestReport, ModelError> {
    let mut report = IngestReport::default();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| ModelError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<Comment>(&line)
            .map_err(|e| e.to_string())
            .and_then(|c| c.validate().map(|_| c).map_err(|e| e.to_string()));
        match parsed {
            Ok(c) => report.comments.push(c),
            Err(message) if strict => {
                return Err(ModelError::Malformed {
                    line: line_no,
                    message,
                })
            }
            Err(message) => {
                tracing::warn!(line = line_no, %message, "skipping malformed comment");
                report.skipped.push(LineError {
                    line: line_no,
                    message,
                });
            }
        }
    }
    Ok(report)
}

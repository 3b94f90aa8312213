//! On-disk artifacts. Every file carries the config hash of the run that
//! wrote it, and every write goes through a temporary file and a rename.

use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use polarscope_core::agents::{Background, SkippedComment};
use polarscope_core::{Csn, CsnDocument, SubgroupId, Triplet};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const TRIPLETS_FORMAT: &str = "polarscope-triplets/1";

/// First line of `triplets.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripletsHeader {
    pub format: String,
    pub config_hash: String,
    pub seed: u64,
    /// Comments analysed; equals triplets plus skipped.
    pub comments: usize,
    pub subgroups: Vec<SubgroupId>,
    pub skipped: Vec<SkippedComment>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TripletsFile {
    pub header: TripletsHeader,
    pub triplets: Vec<Triplet>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackgroundFile {
    pub config_hash: String,
    #[serde(flatten)]
    pub background: Background,
}

fn input_error(path: &Path, message: impl std::fmt::Display) -> CliError {
    CliError::Input {
        path: path.display().to_string(),
        message: message.to_string(),
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("artifacts serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    write_atomic(path, to_json(value).as_bytes())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| input_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| input_error(path, e))
}

pub fn render_triplets(file: &TripletsFile) -> String {
    let mut out = serde_json::to_string(&file.header).expect("header serializes");
    out.push('\n');
    for t in &file.triplets {
        out.push_str(&serde_json::to_string(t).expect("triplet serializes"));
        out.push('\n');
    }
    out
}

pub fn write_triplets(path: &Path, file: &TripletsFile) -> Result<(), CliError> {
    write_atomic(path, render_triplets(file).as_bytes())
}

pub fn read_triplets(path: &Path) -> Result<TripletsFile, CliError> {
    let reader = BufReader::new(fs::File::open(path).map_err(|e| input_error(path, e))?);
    let mut lines = reader.lines().enumerate();
    let header: TripletsHeader = match lines.next() {
        Some((_, line)) => {
            serde_json::from_str(&line?).map_err(|e| input_error(path, format!("line 1: not a triplets header: {e}")))?
        }
        None => return Err(input_error(path, "empty file")),
    };
    if header.format != TRIPLETS_FORMAT {
        return Err(input_error(path, format!("unsupported format `{}`", header.format)));
    }
    let mut triplets = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        triplets.push(serde_json::from_str(&line).map_err(|e| input_error(path, format!("line {}: {e}", idx + 1)))?);
    }
    Ok(TripletsFile { header, triplets })
}

pub fn write_csn(path: &Path, csn: &Csn, hash: &str) -> Result<(), CliError> {
    let mut doc = csn.to_document();
    doc.config_hash = Some(hash.to_string());
    write_json(path, &doc)
}

/// The network and the hash it was written under, if any.
pub fn read_csn(path: &Path) -> Result<(Csn, Option<String>), CliError> {
    let doc: CsnDocument = read_json(path)?;
    let hash = doc.config_hash.clone();
    let csn = Csn::try_from(doc).map_err(|e| input_error(path, e))?;
    Ok((csn, hash))
}

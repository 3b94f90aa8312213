//! Loaders for the three stance benchmarks in their published layouts.
//!
//! | format  | delimiter | columns used                                  | labels                       |
//! |---------|-----------|-----------------------------------------------|------------------------------|
//! | SEM16   | tab       | `Target`, `Tweet`, `Stance`                   | `FAVOR`, `AGAINST`, `NONE`   |
//! | PStance | comma     | `Tweet`, `Target`, `Stance`                   | `FAVOR`, `AGAINST`           |
//! | VAST    | comma     | `post`, `topic_str` (or `new_topic`), `label` | `0` con, `1` pro, `2` neutral |
//!
//! Header names match case-insensitively. Files are read as UTF-8 with lossy
//! replacement, since some distributions are Latin-1 encoded.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EvalError, Stance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dataset {
    #[serde(rename = "sem16")]
    Sem16,
    #[serde(rename = "pstance")]
    PStance,
    #[serde(rename = "vast")]
    Vast,
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dataset::Sem16 => "SEM16",
            Dataset::PStance => "P-Stance",
            Dataset::Vast => "VAST",
        })
    }
}

impl std::str::FromStr for Dataset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "sem16" | "semeval2016" => Ok(Dataset::Sem16),
            "pstance" => Ok(Dataset::PStance),
            "vast" => Ok(Dataset::Vast),
            _ => Err(format!("unknown dataset `{s}` (expected sem16, pstance or vast)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    /// From the file name; files naming no split count as test data.
    fn infer(path: &Path) -> Split {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().to_ascii_lowercase())
            .unwrap_or_default();
        let tokens: Vec<&str> = name.split(|c: char| !c.is_ascii_alphanumeric()).collect();
        if tokens.iter().any(|t| t.starts_with("train")) {
            Split::Train
        } else if tokens.iter().any(|t| t.starts_with("dev") || matches!(*t, "val" | "valid" | "validation")) {
            Split::Dev
        } else {
            Split::Test
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub text: String,
    pub target: String,
    pub gold: Stance,
    pub dataset: Dataset,
    pub split: Split,
}

/// Gold label counts for one target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClassTally {
    pub favor: usize,
    pub against: usize,
    pub none: usize,
}

impl ClassTally {
    pub fn total(&self) -> usize {
        self.favor + self.against + self.none
    }
}

pub fn target_counts(records: &[EvalRecord]) -> BTreeMap<String, ClassTally> {
    let mut out: BTreeMap<String, ClassTally> = BTreeMap::new();
    for r in records {
        let t = out.entry(r.target.clone()).or_default();
        match r.gold {
            Stance::Favor => t.favor += 1,
            Stance::Against => t.against += 1,
            Stance::None => t.none += 1,
        }
    }
    out
}

struct Layout {
    delimiter: u8,
    text: &'static [&'static str],
    target: &'static [&'static str],
    label: &'static [&'static str],
}

fn layout(format: Dataset) -> Layout {
    match format {
        Dataset::Sem16 => Layout {
            delimiter: b'\t',
            text: &["Tweet"],
            target: &["Target"],
            label: &["Stance"],
        },
        Dataset::PStance => Layout {
            delimiter: b',',
            text: &["Tweet"],
            target: &["Target"],
            label: &["Stance"],
        },
        Dataset::Vast => Layout {
            delimiter: b',',
            text: &["post"],
            target: &["topic_str", "new_topic"],
            label: &["label"],
        },
    }
}

fn parse_label(format: Dataset, raw: &str) -> Result<Stance, String> {
    let raw = raw.trim();
    match format {
        Dataset::Sem16 | Dataset::PStance => match raw.to_ascii_uppercase().as_str() {
            "FAVOR" => Ok(Stance::Favor),
            "AGAINST" => Ok(Stance::Against),
            "NONE" if format == Dataset::Sem16 => Ok(Stance::None),
            _ => Err(format!("unknown stance label `{raw}`")),
        },
        Dataset::Vast => match raw {
            "0" => Ok(Stance::Against),
            "1" => Ok(Stance::Favor),
            "2" => Ok(Stance::None),
            _ => Err(format!("unknown label `{raw}` (expected 0, 1 or 2)")),
        },
    }
}

pub fn load_dataset(path: &Path, format: Dataset) -> Result<Vec<EvalRecord>, EvalError> {
    let fail = |message: String| EvalError::Format {
        path: path.display().to_string(),
        message,
    };
    let bytes = std::fs::read(path)?;
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Err(fail("empty file".into()));
    }
    let layout = layout(format);
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(layout.delimiter)
        .quoting(format != Dataset::Sem16)
        .flexible(true)
        .from_reader(bytes.as_slice());
    let headers: Vec<String> = reader
        .byte_headers()
        .map_err(|e| fail(e.to_string()))?
        .iter()
        .map(|h| String::from_utf8_lossy(h).trim().trim_start_matches('\u{feff}').to_string())
        .collect();
    let find = |names: &[&str]| -> Result<usize, EvalError> {
        names
            .iter()
            .find_map(|n| headers.iter().position(|h| h.eq_ignore_ascii_case(n)))
            .ok_or_else(|| fail(format!("missing column `{}`", names[0])))
    };
    let (text_col, target_col, label_col) = (find(layout.text)?, find(layout.target)?, find(layout.label)?);
    let split = Split::infer(path);

    let mut records = Vec::new();
    for (i, row) in reader.byte_records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| fail(format!("line {line}: {e}")))?;
        if row.iter().all(|f| f.iter().all(u8::is_ascii_whitespace)) {
            continue;
        }
        let field = |c: usize| -> Result<String, EvalError> {
            row.get(c)
                .map(|f| String::from_utf8_lossy(f).trim().to_string())
                .ok_or_else(|| fail(format!("line {line}: too few fields")))
        };
        let gold = parse_label(format, &field(label_col)?).map_err(|m| fail(format!("line {line}: {m}")))?;
        records.push(EvalRecord {
            text: field(text_col)?,
            target: field(target_col)?,
            gold,
            dataset: format,
            split,
        });
    }
    if records.is_empty() {
        return Err(fail("no records".into()));
    }
    Ok(records)
}

//! Human review of comments the subgroup explorer could not place.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::AgentError;
use crate::model::{GroupIndex, SubgroupId, Triplet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReviewMode {
    Interactive,
    #[default]
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewItem {
    pub comment_id: String,
    pub text: String,
    pub candidate_subgroups: Vec<SubgroupId>,
    #[serde(default)]
    pub resolution: Option<SubgroupId>,
}

/// Resolves queued items. Implementations may append new subgroups to
/// `roster` (never beyond `max`).
pub trait Reviewer {
    fn review(
        &mut self,
        items: Vec<ReviewItem>,
        roster: &mut Vec<SubgroupId>,
        max: usize,
    ) -> Result<Vec<ReviewItem>, AgentError>;

    /// Whether a queue shorter than the threshold is still handed over when
    /// exploration ends.
    fn flushes_remainder(&self) -> bool {
        false
    }
}

/// Appends queued items to a JSON Lines file and leaves them unresolved.
#[derive(Debug)]
pub struct FileReviewer {
    path: PathBuf,
    written: usize,
}

impl FileReviewer {
    /// Truncates `path` so a rerun never mixes queues.
    pub fn create(path: impl Into<PathBuf>) -> Result<Self, AgentError> {
        let path = path.into();
        File::create(&path)?;
        Ok(FileReviewer { path, written: 0 })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn written(&self) -> usize {
        self.written
    }
}

impl Reviewer for FileReviewer {
    fn review(
        &mut self,
        items: Vec<ReviewItem>,
        _roster: &mut Vec<SubgroupId>,
        _max: usize,
    ) -> Result<Vec<ReviewItem>, AgentError> {
        let file = OpenOptions::new().append(true).create(true).open(&self.path)?;
        let mut w = BufWriter::new(file);
        for item in &items {
            serde_json::to_writer(&mut w, item).map_err(std::io::Error::from)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        self.written += items.len();
        Ok(items)
    }

    fn flushes_remainder(&self) -> bool {
        true
    }
}

/// Keeps the queue in memory; used when no review file is configured.
#[derive(Debug, Default)]
pub(crate) struct DeferredReviewer;

impl Reviewer for DeferredReviewer {
    fn review(
        &mut self,
        items: Vec<ReviewItem>,
        _roster: &mut Vec<SubgroupId>,
        _max: usize,
    ) -> Result<Vec<ReviewItem>, AgentError> {
        Ok(items)
    }
}

/// Prompts on a terminal: numbered subgroups, `n` for a new subgroup, `s` to
/// skip. End of input skips the remaining items.
pub struct TerminalReviewer<R, W> {
    input: R,
    output: W,
}

impl<R: BufRead, W: Write> TerminalReviewer<R, W> {
    pub fn new(input: R, output: W) -> Self {
        TerminalReviewer { input, output }
    }

    fn read_line(&mut self) -> Result<Option<String>, AgentError> {
        let mut line = String::new();
        if self.input.read_line(&mut line)? == 0 {
            return Ok(None);
        }
        Ok(Some(line.trim().to_string()))
    }

    fn ask(
        &mut self,
        item: &ReviewItem,
        roster: &mut Vec<SubgroupId>,
        max: usize,
    ) -> Result<Option<SubgroupId>, AgentError> {
        writeln!(self.output, "\ncomment {}: {}", item.comment_id, item.text)?;
        for (k, g) in roster.iter().enumerate() {
            writeln!(self.output, "  {}) {}", k + 1, g.label)?;
        }
        writeln!(self.output, "  n) new subgroup\n  s) skip")?;
        loop {
            write!(self.output, "choice: ")?;
            self.output.flush()?;
            let Some(answer) = self.read_line()? else {
                return Ok(None);
            };
            match answer.as_str() {
                "s" | "S" | "" => return Ok(None),
                "n" | "N" => {
                    if roster.len() >= max {
                        writeln!(self.output, "subgroup limit {max} reached")?;
                        continue;
                    }
                    write!(self.output, "label: ")?;
                    self.output.flush()?;
                    let Some(label) = self.read_line()?.filter(|l| !l.is_empty()) else {
                        return Ok(None);
                    };
                    write!(self.output, "description: ")?;
                    self.output.flush()?;
                    let description = self.read_line()?.unwrap_or_default();
                    let g = SubgroupId::new(roster.len(), label, description);
                    roster.push(g.clone());
                    return Ok(Some(g));
                }
                other => match other.parse::<usize>() {
                    Ok(k) if (1..=roster.len()).contains(&k) => return Ok(Some(roster[k - 1].clone())),
                    _ => writeln!(self.output, "enter 1-{}, n or s", roster.len())?,
                },
            }
        }
    }
}

impl<R: BufRead, W: Write> Reviewer for TerminalReviewer<R, W> {
    fn review(
        &mut self,
        items: Vec<ReviewItem>,
        roster: &mut Vec<SubgroupId>,
        max: usize,
    ) -> Result<Vec<ReviewItem>, AgentError> {
        let mut out = Vec::with_capacity(items.len());
        for mut item in items {
            item.resolution = self.ask(&item, roster, max)?;
            out.push(item);
        }
        Ok(out)
    }
}

/// Hands `queue` to `reviewer` and returns the items with any resolutions.
pub fn human_review(
    queue: Vec<ReviewItem>,
    reviewer: &mut dyn Reviewer,
    roster: &mut Vec<SubgroupId>,
    max: usize,
) -> Result<Vec<ReviewItem>, AgentError> {
    if queue.is_empty() {
        return Ok(queue);
    }
    reviewer.review(queue, roster, max)
}

pub fn write_review_file(path: &Path, items: &[ReviewItem]) -> Result<(), AgentError> {
    let mut w = BufWriter::new(File::create(path)?);
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_review_file(path: &Path) -> Result<Vec<ReviewItem>, AgentError> {
    let reader = BufReader::new(File::open(path)?);
    let mut items = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let item: ReviewItem = serde_json::from_str(&line).map_err(|e| AgentError::ReviewFormat {
            line: idx + 1,
            message: e.to_string(),
        })?;
        items.push(item);
    }
    Ok(items)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ApplySummary {
    pub upgraded: usize,
    pub still_unresolved: usize,
    pub new_subgroups: usize,
}

/// Merges resolved review items into `triplets`: a triplet with no stance
/// whose comment was resolved takes the resolved subgroup. Resolutions may
/// introduce subgroups at the next free index.
pub fn apply_resolutions(
    items: &[ReviewItem],
    triplets: &mut [Triplet],
    roster: &mut Vec<SubgroupId>,
    max: usize,
) -> Result<ApplySummary, AgentError> {
    let mut summary = ApplySummary::default();
    let mut resolved: Vec<(&str, GroupIndex)> = Vec::new();
    for (line, item) in items.iter().enumerate() {
        let Some(res) = &item.resolution else {
            summary.still_unresolved += 1;
            continue;
        };
        let bad = |message: String| AgentError::ReviewFormat {
            line: line + 1,
            message,
        };
        match roster.get(res.index) {
            Some(g) if g.label == res.label => {}
            Some(g) => {
                return Err(bad(format!(
                    "resolution index {} is `{}`, not `{}`",
                    res.index, g.label, res.label
                )))
            }
            None if res.index == roster.len() => {
                if roster.len() >= max {
                    return Err(bad(format!("new subgroup `{}` exceeds the limit of {max}", res.label)));
                }
                roster.push(res.clone());
                summary.new_subgroups += 1;
            }
            None => return Err(bad(format!("resolution index {} skips past the roster", res.index))),
        }
        resolved.push((item.comment_id.as_str(), res.index));
    }
    for t in triplets.iter_mut().filter(|t| t.stance.is_none()) {
        if let Some((_, g)) = resolved.iter().find(|(id, _)| *id == t.comment_id) {
            t.stance = Some(*g);
            summary.upgraded += 1;
        }
    }
    Ok(summary)
}

//! Shared domain types: comments, subgroups, sentiment scores, triplets and
//! the community sentiment network itself.

mod ingest;
mod slice;

pub use ingest::{read_comments, read_comments_from, IngestReport, LineError};
pub use slice::{slice_by_time, TimeSlice};

use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default cap on the number of subgroups a single analysis may discover.
pub const DEFAULT_MAX_SUBGROUPS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("sentiment score must be finite, got {0}")]
    InvalidScore(f64),
    #[error("comment corpus is empty")]
    EmptyCorpus,
    #[error("time window must be positive")]
    InvalidWindow,
    #[error("comment `{0}` has empty text")]
    EmptyText(String),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

/// One social-media post.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comment {
    pub id: String,
    pub text: String,
    pub author: String,
    #[serde(default)]
    pub likes: u64,
    pub timestamp: DateTime<Utc>,
    #[serde(default)]
    pub topic: String,
}

impl Comment {
    /// Validating constructor; rejects text that is empty after trimming.
    pub fn new(
        id: impl Into<String>,
        text: impl Into<String>,
        author: impl Into<String>,
        likes: u64,
        timestamp: DateTime<Utc>,
        topic: impl Into<String>,
    ) -> Result<Self, ModelError> {
        let comment = Comment {
            id: id.into(),
            text: text.into(),
            author: author.into(),
            likes,
            timestamp,
            topic: topic.into(),
        };
        comment.validate()?;
        Ok(comment)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.text.trim().is_empty() {
            return Err(ModelError::EmptyText(self.id.clone()));
        }
        Ok(())
    }
}

/// A subgroup discovered during background mining.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubgroupId {
    pub index: usize,
    pub label: String,
    #[serde(default)]
    pub description: String,
}

impl SubgroupId {
    pub fn new(index: usize, label: impl Into<String>, description: impl Into<String>) -> Self {
        SubgroupId {
            index,
            label: label.into(),
            description: description.into(),
        }
    }
}

impl fmt::Display for SubgroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// Sentiment in `[-1, +1]`. Negative is hostile, positive is friendly.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SentimentScore(f64);

impl SentimentScore {
    pub const ZERO: SentimentScore = SentimentScore(0.0);

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for SentimentScore {
    type Error = ModelError;

    fn try_from(raw: f64) -> Result<Self, Self::Error> {
        if !raw.is_finite() {
            return Err(ModelError::InvalidScore(raw));
        }
        if !(-1.0..=1.0).contains(&raw) {
            return Err(ModelError::InvalidScore(raw));
        }
        Ok(SentimentScore(raw))
    }
}

impl From<SentimentScore> for f64 {
    fn from(s: SentimentScore) -> f64 {
        s.0
    }
}

impl fmt::Display for SentimentScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+.2}", self.0)
    }
}

/// Normalizes a raw agent score into the sentiment domain.
pub fn clamp_score(raw: f64) -> Result<SentimentScore, ModelError> {
    if !raw.is_finite() {
        return Err(ModelError::InvalidScore(raw));
    }
    // `clamp` keeps -0.0 as -0.0; normalize so serialized output is stable.
    let v = raw.clamp(-1.0, 1.0);
    Ok(SentimentScore(if v == 0.0 { 0.0 } else { v }))
}

/// Index of a subgroup within the analysis roster.
pub type GroupIndex = usize;

/// `(personal stance, sentiment score, target subgroup)` for one comment.
///
/// `stance == None` marks an incomplete triplet that the network builder
/// completes by imputation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triplet {
    pub comment_id: String,
    pub stance: Option<GroupIndex>,
    pub score: SentimentScore,
    pub target: GroupIndex,
    pub likes: u64,
}

impl Triplet {
    pub fn is_complete(&self) -> bool {
        self.stance.is_some()
    }
}

/// Aggregated observations for one directed subgroup pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeStat {
    /// Likes-weighted mean sentiment.
    pub score: f64,
    pub weight_sum: f64,
    pub count: u64,
}

/// Community sentiment network: directed, weighted, self-loops allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct Csn {
    pub subgroups: Vec<SubgroupId>,
    /// `edges[i][j]` is the sentiment of subgroup `i` towards `j`, absent
    /// when no comment from `i` about `j` was observed.
    pub edges: Vec<Vec<Option<EdgeStat>>>,
    pub comment_count: Vec<u64>,
    pub total_comments: u64,
    pub seed: Option<u64>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CsnInvariantError {
    #[error("adjacency has {rows} rows for {subgroups} subgroups")]
    NotSquare { rows: usize, subgroups: usize },
    #[error("edge ({0}, {1}) score {2} outside [-1, 1]")]
    ScoreOutOfRange(usize, usize, f64),
    #[error("comment counts sum to {sum}, total is {total}")]
    CountMismatch { sum: u64, total: u64 },
    #[error("subgroup at position {position} carries index {index}")]
    IndexMismatch { position: usize, index: usize },
    #[error("edge ({0}, {1}) has weight sum below its count")]
    WeightBelowCount(usize, usize),
}

impl Csn {
    /// Network over `subgroups` with no edges and no comments.
    pub fn empty(subgroups: Vec<SubgroupId>) -> Self {
        let n = subgroups.len();
        Csn {
            subgroups,
            edges: vec![vec![None; n]; n],
            comment_count: vec![0; n],
            total_comments: 0,
            seed: None,
        }
    }

    pub fn len(&self) -> usize {
        self.subgroups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subgroups.is_empty()
    }

    /// `e_ij`, or `None` when the pair was never observed.
    pub fn score(&self, i: GroupIndex, j: GroupIndex) -> Option<f64> {
        self.edges.get(i)?.get(j)?.map(|e| e.score)
    }

    pub fn edge(&self, i: GroupIndex, j: GroupIndex) -> Option<&EdgeStat> {
        self.edges.get(i)?.get(j)?.as_ref()
    }

    /// Present edges in row-major order.
    pub fn iter_edges(&self) -> impl Iterator<Item = (GroupIndex, GroupIndex, &EdgeStat)> + '_ {
        self.edges.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .filter_map(move |(j, e)| e.as_ref().map(|e| (i, j, e)))
        })
    }

    pub fn validate(&self) -> Result<(), CsnInvariantError> {
        let n = self.subgroups.len();
        if self.edges.len() != n || self.edges.iter().any(|r| r.len() != n) {
            return Err(CsnInvariantError::NotSquare {
                rows: self.edges.len(),
                subgroups: n,
            });
        }
        if self.comment_count.len() != n {
            return Err(CsnInvariantError::NotSquare {
                rows: self.comment_count.len(),
                subgroups: n,
            });
        }
        for (position, g) in self.subgroups.iter().enumerate() {
            if g.index != position {
                return Err(CsnInvariantError::IndexMismatch {
                    position,
                    index: g.index,
                });
            }
        }
        for (i, j, e) in self.iter_edges() {
            if !(-1.0..=1.0).contains(&e.score) {
                return Err(CsnInvariantError::ScoreOutOfRange(i, j, e.score));
            }
            if e.weight_sum < e.count as f64 {
                return Err(CsnInvariantError::WeightBelowCount(i, j));
            }
        }
        let sum: u64 = self.comment_count.iter().sum();
        if sum != self.total_comments {
            return Err(CsnInvariantError::CountMismatch {
                sum,
                total: self.total_comments,
            });
        }
        Ok(())
    }
}

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

use super::{Comment, ModelError};

/// Comments whose timestamps fall in the half-open window `[start, end)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSlice {
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
    pub comments: Vec<Comment>,
}

impl TimeSlice {
    pub fn contains(&self, t: DateTime<Utc>) -> bool {
        self.start <= t && t < self.end
    }

    pub fn is_empty(&self) -> bool {
        self.comments.is_empty()
    }
}

/// Partitions `comments` into consecutive windows of length `window`,
/// anchored at the earliest timestamp. Windows with no comments are kept so
/// that a series over the result has no gaps.
pub fn slice_by_time(comments: &[Comment], window: Duration) -> Result<Vec<TimeSlice>, ModelError> {
    if window <= Duration::zero() {
        return Err(ModelError::InvalidWindow);
    }
    let first = comments
        .iter()
        .map(|c| c.timestamp)
        .min()
        .ok_or(ModelError::EmptyCorpus)?;
    let last = comments.iter().map(|c| c.timestamp).max().unwrap_or(first);

    let window_ns = window.num_nanoseconds().ok_or(ModelError::InvalidWindow)? as i128;
    let bucket_of = |t: DateTime<Utc>| -> usize {
        let offset = (t - first)
            .num_nanoseconds()
            .map(i128::from)
            .unwrap_or_else(|| i128::from((t - first).num_milliseconds()) * 1_000_000);
        (offset / window_ns) as usize
    };

    let n_slices = bucket_of(last) + 1;
    let mut slices: Vec<TimeSlice> = (0..n_slices)
        .map(|k| {
            let start = first + window * k as i32;
            TimeSlice {
                start,
                end: start + window,
                comments: Vec::new(),
            }
        })
        .collect();

    let mut ordered: Vec<&Comment> = comments.iter().collect();
    ordered.sort_by_key(|c| c.timestamp);
    for c in ordered {
        slices[bucket_of(c.timestamp)].comments.push(c.clone());
    }
    Ok(slices)
}

//! Zero-shot stance-detection evaluation.

mod dataset;
mod metrics;
mod runner;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::AgentError;
use crate::model::SentimentScore;

pub use dataset::{load_dataset, target_counts, ClassTally, Dataset, EvalRecord, Split};
pub use metrics::{f1, f1_exact, f_avg, f_avg_exact, macro_f1, macro_f1_exact, ClassCounts, ConfusionCounts};
pub use runner::{run_zero_shot_eval, EvalCheckpoint, EvalFailure, EvalOptions, EvalReport, TargetReport};

pub const DEFAULT_TAU: f64 = 0.1;

/// Stance toward a target. `None` doubles as the neutral class of datasets
/// labelled Pro/Con/Neutral, with Pro as `Favor` and Con as `Against`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stance {
    Favor,
    Against,
    None,
}

impl Stance {
    pub const ALL: [Stance; 3] = [Stance::Favor, Stance::Against, Stance::None];

    pub(crate) fn idx(self) -> usize {
        match self {
            Stance::Favor => 0,
            Stance::Against => 1,
            Stance::None => 2,
        }
    }
}

impl fmt::Display for Stance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stance::Favor => "FAVOR",
            Stance::Against => "AGAINST",
            Stance::None => "NONE",
        })
    }
}

/// `score > tau` is Favor, `score < -tau` is Against, anything in the closed
/// dead zone `[-tau, tau]` is None.
pub fn map_score_to_stance(score: SentimentScore, tau: f64) -> Stance {
    let s = score.value();
    if s > tau {
        Stance::Favor
    } else if s < -tau {
        Stance::Against
    } else {
        Stance::None
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{path}: {message}")]
    Format { path: String, message: String },
    #[error("nothing to evaluate")]
    EmptyEval,
    #[error("records mix datasets {0} and {1}")]
    MixedDatasets(Dataset, Dataset),
    #[error("tau must lie in [0, 1), got {0}")]
    InvalidTau(f64),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("interrupted after {processed} records; rerun to resume")]
    Interrupted { processed: usize },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Agent(#[from] AgentError),
}

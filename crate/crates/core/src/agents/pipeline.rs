//! The full triplet extraction run, with checkpoint and resume.

use std::io;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::review::{DeferredReviewer, FileReviewer, ReviewItem, ReviewMode, Reviewer, TerminalReviewer};
use super::stages::AgentSystem;
use super::{AgentError, Background};
use crate::model::{Comment, GroupIndex, Triplet};
use crate::seed::fingerprint;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedComment {
    pub comment_id: String,
    pub reason: String,
}

/// Comments that produced no triplet.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedReport {
    pub skipped: Vec<SkippedComment>,
}

impl SkippedReport {
    pub fn len(&self) -> usize {
        self.skipped.len()
    }

    pub fn is_empty(&self) -> bool {
        self.skipped.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub background: Background,
    pub triplets: Vec<Triplet>,
    pub skipped: SkippedReport,
    /// Review items nobody resolved during the run.
    pub unresolved: Vec<ReviewItem>,
}

/// Progress of a run, written after every batch of comments so that a failed
/// or killed run can pick up where it stopped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineCheckpoint {
    pub config_hash: String,
    pub corpus_digest: String,
    pub stage: String,
    /// Index of the next comment to analyse.
    pub cursor: usize,
    pub background: Background,
    pub stances: Vec<Option<GroupIndex>>,
    pub unresolved: Vec<ReviewItem>,
    pub triplets: Vec<Triplet>,
    pub skipped: SkippedReport,
}

impl PipelineCheckpoint {
    pub fn load(path: &Path) -> Result<Option<Self>, AgentError> {
        match std::fs::read_to_string(path) {
            Ok(text) => serde_json::from_str(&text)
                .map(Some)
                .map_err(|e| AgentError::Checkpoint(format!("{}: {e}", path.display()))),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), AgentError> {
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, serde_json::to_vec_pretty(self).map_err(io::Error::from)?)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }
}

fn corpus_digest(comments: &[Comment]) -> String {
    fingerprint(&comments)
}

/// Runs every stage with the reviewer implied by the configured review mode.
pub fn run_triplet_pipeline(comments: &[Comment], system: &AgentSystem) -> Result<PipelineOutput, AgentError> {
    match (system.config().review_mode, &system.review_path) {
        (ReviewMode::Interactive, _) => {
            let stdin = io::stdin();
            let mut reviewer = TerminalReviewer::new(stdin.lock(), io::stderr());
            run_triplet_pipeline_with(comments, system, &mut reviewer)
        }
        (ReviewMode::File, Some(path)) => {
            let mut reviewer = FileReviewer::create(path)?;
            run_triplet_pipeline_with(comments, system, &mut reviewer)
        }
        (ReviewMode::File, None) => run_triplet_pipeline_with(comments, system, &mut DeferredReviewer),
    }
}

/// Background mining, subgroup exploration with review, then the per-comment
/// semantic analysis and assessment loop. Every comment ends up either as a
/// triplet or in the skipped report.
pub fn run_triplet_pipeline_with(
    comments: &[Comment],
    system: &AgentSystem,
    reviewer: &mut dyn Reviewer,
) -> Result<PipelineOutput, AgentError> {
    if comments.is_empty() {
        return Err(AgentError::EmptyCorpus);
    }
    if let Some(c) = comments.iter().find(|c| c.text.trim().is_empty()) {
        return Err(AgentError::EmptyText(c.id.clone()));
    }
    let config = system.config();
    let config_hash = config.fingerprint();
    let digest = corpus_digest(comments);
    let checkpoint_path = system.checkpoint_path.as_deref();

    let resumed = match checkpoint_path {
        Some(p) => PipelineCheckpoint::load(p)?,
        None => None,
    };
    let mut state = match resumed {
        Some(cp) => {
            if cp.config_hash != config_hash || cp.corpus_digest != digest {
                return Err(AgentError::Checkpoint(
                    "checkpoint was written by a different configuration or corpus; remove it to start over".into(),
                ));
            }
            tracing::info!(cursor = cp.cursor, "resuming from checkpoint");
            cp
        }
        None => {
            let mut background = system.mine_background(comments)?;
            let exploration = system.explore_subgroups(comments, &background, reviewer)?;
            if exploration.subgroups.is_empty() {
                return Err(AgentError::NoSubgroups);
            }
            background.subgroups = exploration.subgroups;
            PipelineCheckpoint {
                config_hash,
                corpus_digest: digest,
                stage: "semantic_analysis".into(),
                cursor: 0,
                background,
                stances: exploration.stances,
                unresolved: exploration.unresolved,
                triplets: Vec::new(),
                skipped: SkippedReport::default(),
            }
        }
    };

    let workers = config.workers.max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| AgentError::Config(e.to_string()))?;
    let batch = workers * 8;

    while state.cursor < comments.len() {
        let end = (state.cursor + batch).min(comments.len());
        let range = state.cursor..end;
        let analyse = |i: usize| analyse_comment(system, &state.background, &comments[i], state.stances[i]);
        let results: Vec<Result<Option<Triplet>, AgentError>> = if workers == 1 {
            range.clone().map(analyse).collect()
        } else {
            pool.install(|| range.clone().into_par_iter().map(analyse).collect())
        };
        for (i, result) in range.zip(results) {
            match result {
                Ok(Some(t)) => state.triplets.push(t),
                Ok(None) => state.skipped.skipped.push(SkippedComment {
                    comment_id: comments[i].id.clone(),
                    reason: "no sentiment target".into(),
                }),
                Err(e) => {
                    state.cursor = i;
                    if let Some(p) = checkpoint_path {
                        state.save(p)?;
                    }
                    return Err(e);
                }
            }
        }
        state.cursor = end;
        if let Some(p) = checkpoint_path {
            if state.cursor < comments.len() {
                state.save(p)?;
            }
        }
    }

    if let Some(p) = checkpoint_path {
        match std::fs::remove_file(p) {
            Err(e) if e.kind() != io::ErrorKind::NotFound => return Err(e.into()),
            _ => {}
        }
    }
    Ok(PipelineOutput {
        background: state.background,
        triplets: state.triplets,
        skipped: state.skipped,
        unresolved: state.unresolved,
    })
}

fn analyse_comment(
    system: &AgentSystem,
    background: &Background,
    comment: &Comment,
    stance: Option<GroupIndex>,
) -> Result<Option<Triplet>, AgentError> {
    let platform = system.analyze_platform(comment, background)?;
    let linguistic = system.analyze_linguistics(comment, background)?;
    let annotations = system.analyze_sentiment(comment, &platform, &linguistic, &background.subgroups)?;
    system.assess_polarization(comment, &annotations, background, stance)
}

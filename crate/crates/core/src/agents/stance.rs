//! Zero-shot stance detection: the pipeline without the subgroup explorer,
//! with the single target given up front.

use chrono::{DateTime, Utc};

use super::stages::AgentSystem;
use super::{AgentError, Background};
use crate::eval::{map_score_to_stance, Stance};
use crate::model::{Comment, SentimentScore, SubgroupId};

fn eval_comment(id: String, text: &str) -> Comment {
    Comment {
        id,
        text: text.to_string(),
        author: String::new(),
        likes: 0,
        timestamp: DateTime::<Utc>::UNIX_EPOCH,
        topic: String::new(),
    }
}

impl AgentSystem {
    /// Background for one stance target, mined from (a sample of) the texts
    /// that discuss it. The roster is the target alone.
    pub fn target_background(&self, target: &str, texts: &[&str]) -> Result<Background, AgentError> {
        let comments: Vec<Comment> = texts
            .iter()
            .enumerate()
            .filter(|(_, t)| !t.trim().is_empty())
            .map(|(i, t)| eval_comment(i.to_string(), t))
            .collect();
        let mut background = if comments.is_empty() {
            Background {
                event_summary: String::new(),
                timeline: String::new(),
                stakeholders: Vec::new(),
                subgroups: Vec::new(),
            }
        } else {
            self.mine_background(&comments)?
        };
        background.subgroups = vec![SubgroupId::new(0, target, "the stance target")];
        Ok(background)
    }

    /// Sentiment score of `text` toward the background's single target.
    pub fn stance_score(&self, text: &str, background: &Background) -> Result<SentimentScore, AgentError> {
        if text.trim().is_empty() {
            return Err(AgentError::EmptyText("<stance input>".into()));
        }
        let comment = eval_comment("stance".into(), text);
        let platform = self.analyze_platform(&comment, background)?;
        let linguistic = self.analyze_linguistics(&comment, background)?;
        let mut annotations = self.analyze_sentiment(&comment, &platform, &linguistic, &background.subgroups)?;
        // The target is known a priori.
        if annotations.sentiment_target.is_none() {
            annotations.sentiment_target = background.subgroups.first().cloned();
        }
        let triplet = self.assess_polarization(&comment, &annotations, background, None)?;
        Ok(triplet.map(|t| t.score).unwrap_or(annotations.sentiment))
    }

    pub fn detect_stance_with_background(
        &self,
        text: &str,
        background: &Background,
        tau: f64,
    ) -> Result<Stance, AgentError> {
        Ok(map_score_to_stance(self.stance_score(text, background)?, tau))
    }

    /// Mines a background from `text` alone, then scores it.
    pub fn detect_stance(&self, text: &str, target_name: &str, tau: f64) -> Result<Stance, AgentError> {
        if text.trim().is_empty() {
            return Err(AgentError::EmptyText("<stance input>".into()));
        }
        let background = self.target_background(target_name, &[text])?;
        self.detect_stance_with_background(text, &background, tau)
    }
}

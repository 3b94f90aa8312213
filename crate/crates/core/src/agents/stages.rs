use std::path::PathBuf;
use std::sync::Arc;

use rand::seq::index::sample;

use super::mock::{BackgroundDraft, MockRules};
use super::prompts::{render, section};
use super::remote;
use super::review::{human_review, ReviewItem, Reviewer};
use super::transport::{ChatMessage, ChatTransport, HttpChat};
use super::{roster_text, AgentConfig, AgentError, AgentRole, Backend, Background, PipelineConfig, SemanticAnnotations, Stage};
use crate::model::{clamp_score, Comment, GroupIndex, SubgroupId, Triplet};
use crate::seed::stage_rng;

/// Result of subgroup exploration.
#[derive(Debug, Clone, PartialEq)]
pub struct Exploration {
    pub subgroups: Vec<SubgroupId>,
    /// Author subgroup per input comment, `None` when still unresolved.
    pub stances: Vec<Option<GroupIndex>>,
    /// Items handed to review that came back unresolved.
    pub unresolved: Vec<ReviewItem>,
}

/// The six configured agents plus everything they need at run time.
#[derive(Clone)]
pub struct AgentSystem {
    config: PipelineConfig,
    mock: Arc<MockRules>,
    transport: Arc<dyn ChatTransport>,
    pub(crate) review_path: Option<PathBuf>,
    pub(crate) checkpoint_path: Option<PathBuf>,
}

impl std::fmt::Debug for AgentSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AgentSystem")
            .field("config", &self.config)
            .field("review_path", &self.review_path)
            .field("checkpoint_path", &self.checkpoint_path)
            .finish_non_exhaustive()
    }
}

impl AgentSystem {
    pub fn new(config: PipelineConfig) -> Result<Self, AgentError> {
        config.validate()?;
        Ok(AgentSystem {
            config,
            mock: Arc::new(MockRules::bundled().clone()),
            transport: Arc::new(HttpChat),
            review_path: None,
            checkpoint_path: None,
        })
    }

    pub fn with_mock_rules(mut self, rules: MockRules) -> Self {
        self.mock = Arc::new(rules);
        self
    }

    pub fn with_transport(mut self, transport: Arc<dyn ChatTransport>) -> Self {
        self.transport = transport;
        self
    }

    pub fn with_review_file(mut self, path: impl Into<PathBuf>) -> Self {
        self.review_path = Some(path.into());
        self
    }

    pub fn with_checkpoint(mut self, path: impl Into<PathBuf>) -> Self {
        self.checkpoint_path = Some(path.into());
        self
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn mock_rules(&self) -> &MockRules {
        &self.mock
    }

    fn agent(&self, role: AgentRole) -> &AgentConfig {
        self.config.agent(role)
    }

    fn is_mock(&self, role: AgentRole) -> bool {
        self.agent(role).backend == Backend::Mock
    }

    fn chat(&self, role: AgentRole, stage: Stage, prompt: String) -> Result<(Vec<ChatMessage>, String), AgentError> {
        let messages = vec![
            ChatMessage::system(format!(
                "You are the {} in a multi-agent group polarization analysis team. Follow the requested output format exactly.",
                role.title()
            )),
            ChatMessage::user(prompt),
        ];
        let reply = self
            .transport
            .complete(&messages, self.agent(role))
            .map_err(|e| AgentError::stage(stage, format!("{role}: {e}")))?;
        Ok((messages, reply))
    }

    /// Asks for a JSON reply; an unparseable reply gets one repair request.
    fn chat_json<T>(
        &self,
        role: AgentRole,
        stage: Stage,
        prompt: String,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<T, AgentError> {
        let (mut messages, reply) = self.chat(role, stage, prompt)?;
        let first_err = match parse(&reply) {
            Ok(v) => return Ok(v),
            Err(e) => e,
        };
        tracing::warn!(%role, error = %first_err, "unparseable reply, asking for a repair");
        messages.push(ChatMessage::assistant(reply));
        messages.push(ChatMessage::user(format!(
            "Your reply could not be parsed ({first_err}). Reply again with only the JSON object in the requested format."
        )));
        let repaired = self
            .transport
            .complete(&messages, self.agent(role))
            .map_err(|e| AgentError::stage(stage, format!("{role}: {e}")))?;
        parse(&repaired).map_err(|e| AgentError::stage(stage, format!("{role}: unparseable reply: {e}")))
    }

    /// Input order is preserved; corpora larger than `sample_size` are
    /// sampled uniformly without replacement.
    pub(crate) fn sample<'a>(&self, comments: &'a [Comment]) -> Vec<&'a Comment> {
        if comments.len() <= self.config.sample_size {
            return comments.iter().collect();
        }
        let mut rng = stage_rng(self.config.seed, "background-sample");
        let mut picked = sample(&mut rng, comments.len(), self.config.sample_size).into_vec();
        picked.sort_unstable();
        picked.into_iter().map(|i| &comments[i]).collect()
    }

    fn sample_text(sample: &[&Comment]) -> String {
        sample
            .iter()
            .map(|c| c.text.replace('\n', " "))
            .collect::<Vec<_>>()
            .join("\n")
    }

    fn background_text(background: &Background) -> String {
        let mut s = background.event_summary.clone();
        if !background.timeline.is_empty() {
            s.push_str("\nTimeline: ");
            s.push_str(&background.timeline);
        }
        if !background.stakeholders.is_empty() {
            s.push_str("\nStakeholders: ");
            s.push_str(&background.stakeholders.join(", "));
        }
        s
    }

    /// Domain specialist: event background from a sample of the corpus.
    /// The returned roster is empty; see [`AgentSystem::explore_subgroups`].
    pub fn mine_background(&self, comments: &[Comment]) -> Result<Background, AgentError> {
        if comments.is_empty() {
            return Err(AgentError::EmptyCorpus);
        }
        let sample = self.sample(comments);
        let role = AgentRole::DomainSpecialist;
        let draft: BackgroundDraft = if self.is_mock(role) {
            self.mock.background(&sample)
        } else {
            let prompt = render(
                &self.agent(role).prompt_template,
                &[("sample", &Self::sample_text(&sample))],
            );
            self.chat_json(role, Stage::BackgroundMining, prompt, remote::parse_background)?
        };
        Ok(Background {
            event_summary: draft.event_summary,
            timeline: draft.timeline,
            stakeholders: draft.stakeholders,
            subgroups: Vec::new(),
        })
    }

    fn discover_roster(&self, comments: &[Comment], background: &Background) -> Result<Vec<SubgroupId>, AgentError> {
        let role = AgentRole::SubgroupExplorer;
        let sample = self.sample(comments);
        let found = if self.is_mock(role) {
            self.mock.discover_roster(&sample)
        } else {
            let prompt = render(
                section(&self.agent(role).prompt_template, "discover"),
                &[
                    ("background", &Self::background_text(background)),
                    ("sample", &Self::sample_text(&sample)),
                    ("max_subgroups", &self.config.max_subgroups.to_string()),
                ],
            );
            self.chat_json(role, Stage::SubgroupExploration, prompt, remote::parse_roster)?
        };
        if found.len() > self.config.max_subgroups {
            let labels: Vec<&str> = found.iter().map(|(l, _)| l.as_str()).collect();
            return Err(AgentError::SubgroupOverflow {
                found: found.len(),
                max: self.config.max_subgroups,
                guidance: format!(
                    "merge subgroups with similar speaking patterns or raise max_subgroups; found: {}",
                    labels.join(", ")
                ),
            });
        }
        Ok(found
            .into_iter()
            .enumerate()
            .map(|(i, (label, description))| SubgroupId::new(i, label, description))
            .collect())
    }

    fn classify(&self, comment: &Comment, background: &Background, roster: &[SubgroupId]) -> Result<Option<GroupIndex>, AgentError> {
        let role = AgentRole::SubgroupExplorer;
        if roster.is_empty() {
            return Ok(None);
        }
        if self.is_mock(role) {
            return Ok(self.mock.classify(&comment.text, roster));
        }
        let prompt = render(
            section(&self.agent(role).prompt_template, "classify"),
            &[
                ("background", &Self::background_text(background)),
                ("subgroups", &roster_text(roster)),
                ("comment", &comment.text),
            ],
        );
        let (_, reply) = self.chat(role, Stage::SubgroupExploration, prompt)?;
        Ok(remote::parse_classification(&reply, roster))
    }

    fn review_candidates(&self, comment: &Comment, roster: &[SubgroupId]) -> Vec<SubgroupId> {
        if self.is_mock(AgentRole::SubgroupExplorer) {
            let matched = self.mock.stance_matches(&comment.text, roster);
            if matched.len() > 1 {
                return matched.into_iter().map(|i| roster[i].clone()).collect();
            }
        }
        roster.to_vec()
    }

    /// Subgroup explorer: builds the roster, then places each comment's
    /// author. Unplaceable comments are queued and handed to `reviewer`
    /// whenever the queue reaches `uncertain_threshold`.
    pub fn explore_subgroups(
        &self,
        comments: &[Comment],
        background: &Background,
        reviewer: &mut dyn Reviewer,
    ) -> Result<Exploration, AgentError> {
        let mut roster = self.discover_roster(comments, background)?;
        let max = self.config.max_subgroups;
        let threshold = self.config.uncertain_threshold;
        let flush_rest = reviewer.flushes_remainder();

        let mut stances = vec![None; comments.len()];
        let mut queue: Vec<(usize, ReviewItem)> = Vec::new();
        let mut unresolved = Vec::new();

        for (i, comment) in comments.iter().enumerate() {
            match self.classify(comment, background, &roster)? {
                Some(g) => stances[i] = Some(g),
                None => {
                    let item = ReviewItem {
                        comment_id: comment.id.clone(),
                        text: comment.text.clone(),
                        candidate_subgroups: self.review_candidates(comment, &roster),
                        resolution: None,
                    };
                    queue.push((i, item));
                    if queue.len() >= threshold {
                        flush_queue(&mut queue, reviewer, &mut roster, max, &mut stances, &mut unresolved)?;
                    }
                }
            }
        }
        if flush_rest {
            flush_queue(&mut queue, reviewer, &mut roster, max, &mut stances, &mut unresolved)?;
        } else {
            unresolved.extend(queue.into_iter().map(|(_, item)| item));
        }
        Ok(Exploration {
            subgroups: roster,
            stances,
            unresolved,
        })
    }

    /// Social media veteran.
    pub fn analyze_platform(&self, comment: &Comment, background: &Background) -> Result<String, AgentError> {
        let role = AgentRole::SocialMediaVeteran;
        if self.is_mock(role) {
            return Ok(self.mock.platform_notes(&comment.text));
        }
        let prompt = render(
            &self.agent(role).prompt_template,
            &[
                ("background", &Self::background_text(background)),
                ("subgroups", &background.roster_text()),
                ("comment", &comment.text),
            ],
        );
        let (_, reply) = self.chat(role, Stage::SemanticAnalysis, prompt)?;
        non_empty(reply, role)
    }

    /// Linguistic expert.
    pub fn analyze_linguistics(&self, comment: &Comment, background: &Background) -> Result<String, AgentError> {
        let role = AgentRole::LinguisticExpert;
        if self.is_mock(role) {
            return Ok(self.mock.linguistic_notes(&comment.text));
        }
        let prompt = render(
            &self.agent(role).prompt_template,
            &[
                ("background", &Self::background_text(background)),
                ("comment", &comment.text),
            ],
        );
        let (_, reply) = self.chat(role, Stage::SemanticAnalysis, prompt)?;
        non_empty(reply, role)
    }

    /// Sentiment analysis expert: score and target from the comment and the
    /// two upstream analyses.
    pub fn analyze_sentiment(
        &self,
        comment: &Comment,
        platform_notes: &str,
        linguistic_notes: &str,
        subgroups: &[SubgroupId],
    ) -> Result<SemanticAnnotations, AgentError> {
        let role = AgentRole::SentimentExpert;
        let (raw, target) = if self.is_mock(role) {
            self.mock
                .sentiment(&comment.text, platform_notes, linguistic_notes, subgroups)
        } else {
            let prompt = render(
                &self.agent(role).prompt_template,
                &[
                    ("subgroups", &roster_text(subgroups)),
                    ("platform_notes", platform_notes),
                    ("linguistic_notes", linguistic_notes),
                    ("comment", &comment.text),
                ],
            );
            self.chat_json(role, Stage::SemanticAnalysis, prompt, |r| remote::parse_sentiment(r, subgroups))?
        };
        let sentiment = clamp_score(raw).map_err(|e| AgentError::stage(Stage::SemanticAnalysis, e))?;
        Ok(SemanticAnnotations {
            platform_notes: platform_notes.to_string(),
            linguistic_notes: linguistic_notes.to_string(),
            sentiment,
            sentiment_target: target.map(|i| subgroups[i].clone()),
        })
    }

    /// Polarization assessor. `Ok(None)` when no target could be determined;
    /// such comments are excluded from the network.
    pub fn assess_polarization(
        &self,
        comment: &Comment,
        annotations: &SemanticAnnotations,
        background: &Background,
        assigned: Option<GroupIndex>,
    ) -> Result<Option<Triplet>, AgentError> {
        let role = AgentRole::PolarizationAssessor;
        let fallback_target = annotations.sentiment_target.as_ref().map(|g| g.index);
        let (stance, score, target) = if self.is_mock(role) {
            (assigned, annotations.sentiment, fallback_target)
        } else {
            let roster = &background.subgroups;
            let assigned_text = assigned
                .and_then(|i| roster.get(i))
                .map(|g| g.label.clone())
                .unwrap_or_else(|| "none".into());
            let annotation_text = format!(
                "score: {}\ntarget: {}",
                annotations.sentiment.value(),
                annotations
                    .sentiment_target
                    .as_ref()
                    .map(|g| g.label.as_str())
                    .unwrap_or("none")
            );
            let prompt = render(
                &self.agent(role).prompt_template,
                &[
                    ("background", &Self::background_text(background)),
                    ("subgroups", &roster_text(roster)),
                    ("assigned_stance", &assigned_text),
                    ("annotations", &annotation_text),
                    ("platform_notes", &annotations.platform_notes),
                    ("linguistic_notes", &annotations.linguistic_notes),
                    ("comment", &comment.text),
                ],
            );
            let reply = self.chat_json(role, Stage::PolarizationAssessment, prompt, |r| {
                remote::parse_assessment(r, roster)
            })?;
            let score = clamp_score(reply.score).map_err(|e| AgentError::stage(Stage::PolarizationAssessment, e))?;
            (reply.stance, score, reply.target.or(fallback_target))
        };
        Ok(target.map(|target| Triplet {
            comment_id: comment.id.clone(),
            stance,
            score,
            target,
            likes: comment.likes,
        }))
    }
}

fn flush_queue(
    queue: &mut Vec<(usize, ReviewItem)>,
    reviewer: &mut dyn Reviewer,
    roster: &mut Vec<SubgroupId>,
    max: usize,
    stances: &mut [Option<GroupIndex>],
    unresolved: &mut Vec<ReviewItem>,
) -> Result<(), AgentError> {
    let (positions, items): (Vec<usize>, Vec<ReviewItem>) = std::mem::take(queue).into_iter().unzip();
    let reviewed = human_review(items, reviewer, roster, max)?;
    if reviewed.len() != positions.len() {
        return Err(AgentError::stage(
            Stage::SubgroupExploration,
            "reviewer returned a different number of items",
        ));
    }
    for (pos, item) in positions.into_iter().zip(reviewed) {
        match &item.resolution {
            Some(g) => stances[pos] = Some(g.index),
            None => unresolved.push(item),
        }
    }
    Ok(())
}

fn non_empty(reply: String, role: AgentRole) -> Result<String, AgentError> {
    let trimmed = reply.trim();
    if trimmed.is_empty() {
        Err(AgentError::stage(role.stage(), format!("{role} returned an empty reply")))
    } else {
        Ok(trimmed.to_string())
    }
}

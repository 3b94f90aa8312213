//! Multi-agent triplet extraction.
//!
//! Comments pass through three stages. Background mining (domain specialist,
//! subgroup explorer) produces the event background and the subgroup roster;
//! semantic analysis (social media veteran, linguistic expert, sentiment
//! expert) annotates each comment; the polarization assessor turns the
//! annotations into a `(stance, score, target)` triplet.
//!
//! Each role is backed either by a chat-completion endpoint or by the
//! deterministic rule system in [`mock`].

pub mod mock;
mod pipeline;
mod prompts;
mod remote;
pub(crate) mod review;
mod stages;
mod stance;
pub mod text;
mod transport;

use std::collections::BTreeMap;
use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ModelError, SentimentScore, SubgroupId, DEFAULT_MAX_SUBGROUPS};

pub use mock::MockRules;
pub use pipeline::{run_triplet_pipeline, run_triplet_pipeline_with, PipelineCheckpoint, PipelineOutput, SkippedComment, SkippedReport};
pub use prompts::PromptSet;
pub use review::{
    apply_resolutions, human_review, read_review_file, write_review_file, ApplySummary, FileReviewer, ReviewItem,
    ReviewMode, Reviewer, TerminalReviewer,
};
pub use stages::{AgentSystem, Exploration};
pub use transport::{
    llm_complete, llm_complete_detailed, mock_chat_reply, ChatMessage, ChatTransport, Completion, HttpChat,
    TransportError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentRole {
    DomainSpecialist,
    SubgroupExplorer,
    SocialMediaVeteran,
    LinguisticExpert,
    SentimentExpert,
    PolarizationAssessor,
}

impl AgentRole {
    pub const ALL: [AgentRole; 6] = [
        AgentRole::DomainSpecialist,
        AgentRole::SubgroupExplorer,
        AgentRole::SocialMediaVeteran,
        AgentRole::LinguisticExpert,
        AgentRole::SentimentExpert,
        AgentRole::PolarizationAssessor,
    ];

    pub fn stage(self) -> Stage {
        match self {
            AgentRole::DomainSpecialist | AgentRole::SubgroupExplorer => Stage::BackgroundMining,
            AgentRole::SocialMediaVeteran | AgentRole::LinguisticExpert | AgentRole::SentimentExpert => {
                Stage::SemanticAnalysis
            }
            AgentRole::PolarizationAssessor => Stage::PolarizationAssessment,
        }
    }

    /// snake_case name, also the prompt file stem.
    pub fn key(self) -> &'static str {
        match self {
            AgentRole::DomainSpecialist => "domain_specialist",
            AgentRole::SubgroupExplorer => "subgroup_explorer",
            AgentRole::SocialMediaVeteran => "social_media_veteran",
            AgentRole::LinguisticExpert => "linguistic_expert",
            AgentRole::SentimentExpert => "sentiment_expert",
            AgentRole::PolarizationAssessor => "polarization_assessor",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            AgentRole::DomainSpecialist => "Domain Specialist",
            AgentRole::SubgroupExplorer => "Subgroup Exploration Expert",
            AgentRole::SocialMediaVeteran => "Social Media Veteran",
            AgentRole::LinguisticExpert => "Linguistic Expert",
            AgentRole::SentimentExpert => "Sentiment Analysis Expert",
            AgentRole::PolarizationAssessor => "Polarization Assessor",
        }
    }
}

impl fmt::Display for AgentRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.title())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    BackgroundMining,
    SubgroupExploration,
    SemanticAnalysis,
    PolarizationAssessment,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::BackgroundMining => "background mining",
            Stage::SubgroupExploration => "subgroup exploration",
            Stage::SemanticAnalysis => "semantic analysis",
            Stage::PolarizationAssessment => "polarization assessment",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    RemoteChat,
    #[default]
    Mock,
}

/// Where remote roles send their requests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EndpointConfig {
    pub url: String,
    /// Environment variable holding the bearer token.
    pub api_key_env: String,
    /// Explicit credential; takes precedence over `api_key_env`. Never
    /// serialized.
    #[serde(skip)]
    pub api_key: Option<String>,
    /// Process-wide request budget; `None` disables throttling.
    pub requests_per_minute: Option<u32>,
    pub backoff_base_ms: u64,
    pub backoff_max_ms: u64,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        EndpointConfig {
            url: "https://api.openai.com/v1/chat/completions".into(),
            api_key_env: "OPENAI_API_KEY".into(),
            api_key: None,
            requests_per_minute: None,
            backoff_base_ms: 500,
            backoff_max_ms: 30_000,
        }
    }
}

mod duration_secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let secs = f64::deserialize(d)?;
        Duration::try_from_secs_f64(secs).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub role: AgentRole,
    pub backend: Backend,
    pub model_name: String,
    pub prompt_template: String,
    pub temperature: f64,
    pub max_retries: u32,
    #[serde(with = "duration_secs", rename = "timeout_secs")]
    pub timeout: Duration,
    #[serde(default)]
    pub endpoint: EndpointConfig,
}

impl AgentConfig {
    /// Defaults for `role`: the cheaper model for the first two stages and
    /// the stronger one for the assessor.
    pub fn default_for(role: AgentRole, backend: Backend) -> Self {
        let model_name = match role {
            AgentRole::PolarizationAssessor => "gpt-4",
            _ => "gpt-3.5-turbo",
        };
        AgentConfig {
            role,
            backend,
            model_name: model_name.into(),
            prompt_template: PromptSet::bundled().template(role).to_string(),
            temperature: 0.0,
            max_retries: 3,
            timeout: Duration::from_secs(60),
            endpoint: EndpointConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub seed: u64,
    /// Comments given to the background miners; larger corpora are sampled.
    pub sample_size: usize,
    pub uncertain_threshold: usize,
    pub max_subgroups: usize,
    /// Parallel workers for the per-comment loop. Output order is unaffected.
    pub workers: usize,
    /// Requires temperature 0 for every role.
    pub deterministic: bool,
    pub review_mode: ReviewMode,
    pub agents: BTreeMap<AgentRole, AgentConfig>,
}

impl PipelineConfig {
    pub fn with_backend(backend: Backend) -> Self {
        PipelineConfig {
            seed: 0,
            sample_size: 200,
            uncertain_threshold: 20,
            max_subgroups: DEFAULT_MAX_SUBGROUPS,
            workers: 1,
            deterministic: true,
            review_mode: ReviewMode::File,
            agents: AgentRole::ALL
                .iter()
                .map(|&r| (r, AgentConfig::default_for(r, backend)))
                .collect(),
        }
    }

    pub fn mock() -> Self {
        Self::with_backend(Backend::Mock)
    }

    pub fn agent(&self, role: AgentRole) -> &AgentConfig {
        &self.agents[&role]
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        let bad = |m: String| Err(AgentError::Config(m));
        for role in AgentRole::ALL {
            match self.agents.get(&role) {
                None => return bad(format!("no configuration for {role}")),
                Some(a) if a.role != role => return bad(format!("{role} entry declares role {}", a.role)),
                Some(a) if self.deterministic && a.temperature != 0.0 => {
                    return bad(format!("{role}: temperature must be 0 in deterministic mode"))
                }
                Some(_) => {}
            }
        }
        if self.sample_size == 0 {
            return bad("sample_size must be at least 1".into());
        }
        if self.uncertain_threshold == 0 {
            return bad("uncertain_threshold must be at least 1".into());
        }
        if self.max_subgroups == 0 {
            return bad("max_subgroups must be at least 1".into());
        }
        Ok(())
    }

    /// Fingerprint of every setting that can change pipeline output.
    pub fn fingerprint(&self) -> String {
        #[derive(Serialize)]
        struct View<'a> {
            seed: u64,
            sample_size: usize,
            uncertain_threshold: usize,
            max_subgroups: usize,
            deterministic: bool,
            review_mode: ReviewMode,
            agents: &'a BTreeMap<AgentRole, AgentConfig>,
        }
        crate::seed::fingerprint(&View {
            seed: self.seed,
            sample_size: self.sample_size,
            uncertain_threshold: self.uncertain_threshold,
            max_subgroups: self.max_subgroups,
            deterministic: self.deterministic,
            review_mode: self.review_mode,
            agents: &self.agents,
        })
    }
}

/// Event background and subgroup roster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Background {
    pub event_summary: String,
    pub timeline: String,
    pub stakeholders: Vec<String>,
    pub subgroups: Vec<SubgroupId>,
}

impl Background {
    /// Bulleted roster for prompts.
    pub fn roster_text(&self) -> String {
        roster_text(&self.subgroups)
    }
}

pub(crate) fn roster_text(roster: &[SubgroupId]) -> String {
    if roster.is_empty() {
        return "(none identified yet)".into();
    }
    roster
        .iter()
        .map(|g| {
            if g.description.is_empty() {
                format!("{}. {}", g.index, g.label)
            } else {
                format!("{}. {}: {}", g.index, g.label, g.description)
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticAnnotations {
    pub platform_notes: String,
    pub linguistic_notes: String,
    pub sentiment: SentimentScore,
    pub sentiment_target: Option<SubgroupId>,
}

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("comment corpus is empty")]
    EmptyCorpus,
    #[error("comment `{0}` has empty text")]
    EmptyText(String),
    #[error("{stage} failed: {message}")]
    StageFailure { stage: Stage, message: String },
    #[error("{found} subgroups exceed the limit of {max}; {guidance}")]
    SubgroupOverflow {
        found: usize,
        max: usize,
        guidance: String,
    },
    #[error("no subgroups identified; resolve the review queue or add subgroup rules")]
    NoSubgroups,
    #[error("review file line {line}: {message}")]
    ReviewFormat { line: usize, message: String },
    #[error("invalid pipeline configuration: {0}")]
    Config(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl AgentError {
    pub(crate) fn stage(stage: Stage, message: impl fmt::Display) -> Self {
        AgentError::StageFailure {
            stage,
            message: message.to_string(),
        }
    }
}

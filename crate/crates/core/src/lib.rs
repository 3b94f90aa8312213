//! Group polarization measurement for social-media comment sets.
//!
//! Comments are turned into `(stance, score, target)` triplets by a staged
//! multi-agent analysis ([`agents`]), aggregated into a Community Sentiment
//! Network ([`csn`]) and summarized by the Community Opposition Index
//! ([`coi`]). [`eval`] scores the agent pipeline on stance-detection data.

pub mod agents;
pub mod coi;
pub mod csn;
pub mod dot;
pub mod eval;
pub mod model;
pub mod seed;
pub mod series;

pub use agents::{
    run_triplet_pipeline, AgentConfig, AgentError, AgentRole, AgentSystem, Backend, Background, PipelineConfig,
    PipelineOutput,
};
pub use coi::{coi, coi_with, CoiError, CoiReport};
pub use csn::{build_csn, internal_cohesion, CsnDocument, CsnError, MissingCohesion};
pub use dot::export_dot;
pub use eval::{load_dataset, map_score_to_stance, run_zero_shot_eval, Dataset, EvalRecord, EvalReport, Stance};
pub use model::{
    clamp_score, slice_by_time, Comment, Csn, GroupIndex, ModelError, SentimentScore, SubgroupId, TimeSlice, Triplet,
};
pub use series::{coi_series, SeriesPoint};

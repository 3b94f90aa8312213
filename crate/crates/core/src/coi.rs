//! Community Opposition Index.
//!
//! For each subgroup `i` the hostility sum is `Σ_{j≠i} (-e_ij)·[e_ij ≤ 0]`
//! over observed edges. It is scaled by the subgroup's cohesion `t_i` and its
//! share of comments `n_i / N`; the index is the sum over subgroups. Self-loops
//! only enter through `t_i`.

use std::fmt::Write as _;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::csn::{internal_cohesion_with, CsnError, MissingCohesion};
use crate::model::{Csn, GroupIndex};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoiError {
    #[error("network has no comments (N = 0)")]
    EmptyNetwork,
    #[error(transparent)]
    Csn(#[from] CsnError),
    #[error("expected {expected} cohesion values, got {got}")]
    CohesionLength { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceBounds {
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgroupTerm {
    pub index: GroupIndex,
    pub subgroup: String,
    /// `n_i / N`
    pub share: f64,
    /// `t_i`
    pub cohesion: f64,
    pub hostility_sum: f64,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoiReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    pub total: f64,
    pub per_subgroup: Vec<SubgroupTerm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slice_bounds: Option<SliceBounds>,
}

/// Hostility carried by one edge: `-e` for non-positive sentiment, else zero.
pub fn hostility_term(e: f64) -> f64 {
    if e <= 0.0 {
        // `-0.0` would otherwise leak into reports.
        -e + 0.0
    } else {
        0.0
    }
}

fn hostility_sum(csn: &Csn, i: GroupIndex) -> f64 {
    (0..csn.len())
        .filter(|&j| j != i)
        .filter_map(|j| csn.score(i, j))
        .map(hostility_term)
        .sum()
}

pub fn subgroup_polarization_with(csn: &Csn, i: GroupIndex, missing: MissingCohesion) -> Result<f64, CoiError> {
    let t = internal_cohesion_with(csn, i, missing)?;
    Ok(t * hostility_sum(csn, i))
}

pub fn subgroup_polarization(csn: &Csn, i: GroupIndex) -> Result<f64, CoiError> {
    subgroup_polarization_with(csn, i, MissingCohesion::default())
}

/// COI with an explicit cohesion vector in place of the self-loop rule.
pub fn coi_with_cohesion(csn: &Csn, cohesion: &[f64]) -> Result<CoiReport, CoiError> {
    if cohesion.len() != csn.len() {
        return Err(CoiError::CohesionLength {
            expected: csn.len(),
            got: cohesion.len(),
        });
    }
    if csn.total_comments == 0 {
        return Err(CoiError::EmptyNetwork);
    }
    let n_total = csn.total_comments as f64;
    let per_subgroup: Vec<SubgroupTerm> = csn
        .subgroups
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let share = csn.comment_count[i] as f64 / n_total;
            let hostility = hostility_sum(csn, i);
            SubgroupTerm {
                index: i,
                subgroup: g.label.clone(),
                share,
                cohesion: cohesion[i],
                hostility_sum: hostility,
                contribution: share * cohesion[i] * hostility,
            }
        })
        .collect();
    let total = per_subgroup.iter().map(|t| t.contribution).sum();
    Ok(CoiReport {
        config_hash: None,
        total,
        per_subgroup,
        slice_bounds: None,
    })
}

pub fn coi_with(csn: &Csn, missing: MissingCohesion) -> Result<CoiReport, CoiError> {
    let cohesion = (0..csn.len())
        .map(|i| internal_cohesion_with(csn, i, missing))
        .collect::<Result<Vec<_>, _>>()?;
    coi_with_cohesion(csn, &cohesion)
}

pub fn coi(csn: &Csn) -> Result<CoiReport, CoiError> {
    coi_with(csn, MissingCohesion::default())
}

impl CoiReport {
    /// Fixed-width table, one row per subgroup plus the total.
    pub fn render_table(&self) -> String {
        let width = self
            .per_subgroup
            .iter()
            .map(|t| t.subgroup.chars().count())
            .max()
            .unwrap_or(0)
            .max("subgroup".len());
        let mut out = String::new();
        if let Some(b) = &self.slice_bounds {
            let _ = writeln!(out, "slice [{}, {})", b.start.to_rfc3339(), b.end.to_rfc3339());
        }
        let _ = writeln!(
            out,
            "{:<width$}  {:>8}  {:>8}  {:>9}  {:>12}",
            "subgroup", "share", "t_i", "hostility", "contribution"
        );
        for t in &self.per_subgroup {
            let _ = writeln!(
                out,
                "{:<width$}  {:>8.4}  {:>8.4}  {:>9.4}  {:>12.6}",
                t.subgroup, t.share, t.cohesion, t.hostility_sum, t.contribution
            );
        }
        let _ = writeln!(out, "{:<width$}  {:>45.6}", "total", self.total);
        out
    }
}

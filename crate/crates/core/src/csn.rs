//! Community sentiment network construction.
//!
//! The build runs in three fixed phases: every complete triplet is
//! accumulated first, then incomplete triplets get a stance imputed from the
//! observed stance frequencies towards their target, and finally the
//! likes-weighted sums are turned into averages. Each triplet carries weight
//! `max(likes, 1)`.
//!
//! Imputed triplets feed back into the count matrix, so later imputations see
//! earlier ones. Incomplete triplets are processed in input order, which makes
//! the result a deterministic function of `(triplets, seed)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Csn, CsnInvariantError, EdgeStat, GroupIndex, SubgroupId, Triplet};
use crate::seed::{draw_categorical, stage_rng, StageRng};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CsnError {
    #[error("triplet `{comment_id}` references subgroup {index} but the roster has {len}")]
    IndexError {
        comment_id: String,
        index: usize,
        len: usize,
    },
    #[error("subgroup index {index} out of range for {len} subgroups")]
    SubgroupOutOfRange { index: usize, len: usize },
    #[error("invalid network: {0}")]
    Invariant(#[from] CsnInvariantError),
    #[error("malformed network document: {0}")]
    Format(String),
}

/// Cohesion assumed for a subgroup with no self-directed sentiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MissingCohesion {
    #[default]
    One,
    Half,
    Zero,
}

impl MissingCohesion {
    pub fn value(self) -> f64 {
        match self {
            MissingCohesion::One => 1.0,
            MissingCohesion::Half => 0.5,
            MissingCohesion::Zero => 0.0,
        }
    }
}

/// Stage name of the imputation stream, see [`crate::seed::derive_seed`].
pub const IMPUTATION_STAGE: &str = "csn-imputation";

#[derive(Debug, Clone)]
struct BuilderState {
    n: usize,
    adj: Vec<f64>,
    weight_sum: Vec<f64>,
    count: Vec<u64>,
    comment_count: Vec<u64>,
    incomplete: Vec<Triplet>,
    rng: StageRng,
}

impl BuilderState {
    fn new(n: usize, seed: u64) -> Self {
        BuilderState {
            n,
            adj: vec![0.0; n * n],
            weight_sum: vec![0.0; n * n],
            count: vec![0; n * n],
            comment_count: vec![0; n],
            incomplete: Vec::new(),
            rng: stage_rng(seed, IMPUTATION_STAGE),
        }
    }

    fn at(&self, src: usize, tgt: usize) -> usize {
        src * self.n + tgt
    }

    fn check(&self, t: &Triplet, index: usize) -> Result<(), CsnError> {
        if index >= self.n {
            return Err(CsnError::IndexError {
                comment_id: t.comment_id.clone(),
                index,
                len: self.n,
            });
        }
        Ok(())
    }

    fn add(&mut self, src: usize, t: &Triplet) {
        let weight = t.likes.max(1) as f64;
        let k = self.at(src, t.target);
        self.adj[k] += t.score.value() * weight;
        self.weight_sum[k] += weight;
        self.count[k] += 1;
        self.comment_count[src] += 1;
    }

    /// Complete triplets go straight into the matrices; incomplete ones are
    /// held back for imputation.
    fn accumulate_complete(&mut self, t: &Triplet) -> Result<(), CsnError> {
        self.check(t, t.target)?;
        match t.stance {
            Some(src) => {
                self.check(t, src)?;
                self.add(src, t);
            }
            None => self.incomplete.push(t.clone()),
        }
        Ok(())
    }

    fn impute_incomplete(&mut self) {
        let pending = std::mem::take(&mut self.incomplete);
        for t in &pending {
            let column: Vec<u64> = (0..self.n).map(|i| self.count[self.at(i, t.target)]).collect();
            let src = draw_categorical(&mut self.rng, &column)
                // No stance observed towards this target yet: uniform over the roster.
                .or_else(|| draw_categorical(&mut self.rng, &vec![1; self.n]))
                .expect("roster is non-empty when a triplet indexes it");
            self.add(src, t);
        }
    }

    fn finalize_averages(self, subgroups: &[SubgroupId], seed: u64) -> Csn {
        let n = self.n;
        let mut edges = vec![vec![None; n]; n];
        for (i, row) in edges.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                let k = i * n + j;
                if self.weight_sum[k] > 0.0 {
                    let mean = self.adj[k] / self.weight_sum[k];
                    *slot = Some(EdgeStat {
                        // Rounding can leave a mean of ±1 inputs a hair outside.
                        score: mean.clamp(-1.0, 1.0),
                        weight_sum: self.weight_sum[k],
                        count: self.count[k],
                    });
                }
            }
        }
        let total = self.comment_count.iter().sum();
        Csn {
            subgroups: subgroups.to_vec(),
            edges,
            comment_count: self.comment_count,
            total_comments: total,
            seed: Some(seed),
        }
    }
}

/// Builds the network for `triplets` over the roster `subgroups`.
///
/// The roster must be indexed `0..len` in order. `seed` drives stance
/// imputation for incomplete triplets through the `csn-imputation` stream.
pub fn build_csn(triplets: &[Triplet], subgroups: &[SubgroupId], seed: u64) -> Result<Csn, CsnError> {
    for (position, g) in subgroups.iter().enumerate() {
        if g.index != position {
            return Err(CsnInvariantError::IndexMismatch {
                position,
                index: g.index,
            }
            .into());
        }
    }
    let mut state = BuilderState::new(subgroups.len(), seed);
    for t in triplets {
        state.accumulate_complete(t)?;
    }
    state.impute_incomplete();
    let csn = state.finalize_averages(subgroups, seed);
    debug_assert!(csn.validate().is_ok());
    Ok(csn)
}

/// `t_i`: positive self-sentiment of subgroup `i`, with `missing` used when no
/// self-loop was observed. Negative self-sentiment yields zero cohesion.
pub fn internal_cohesion_with(csn: &Csn, i: GroupIndex, missing: MissingCohesion) -> Result<f64, CsnError> {
    if i >= csn.len() {
        return Err(CsnError::SubgroupOutOfRange {
            index: i,
            len: csn.len(),
        });
    }
    Ok(match csn.score(i, i) {
        Some(e) => e.max(0.0),
        None => missing.value(),
    })
}

pub fn internal_cohesion(csn: &Csn, i: GroupIndex) -> Result<f64, CsnError> {
    internal_cohesion_with(csn, i, MissingCohesion::default())
}

/// One serialized edge of a [`CsnDocument`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub src: usize,
    pub tgt: usize,
    pub score: f64,
    pub weight_sum: f64,
    pub count: u64,
}

/// On-disk form of a [`Csn`]. Only present edges are listed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsnDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    pub subgroups: Vec<SubgroupId>,
    pub edges: Vec<EdgeRecord>,
    pub comment_count: Vec<u64>,
    pub total_comments: u64,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl From<&Csn> for CsnDocument {
    fn from(csn: &Csn) -> Self {
        CsnDocument {
            config_hash: None,
            subgroups: csn.subgroups.clone(),
            edges: csn
                .iter_edges()
                .map(|(src, tgt, e)| EdgeRecord {
                    src,
                    tgt,
                    score: e.score,
                    weight_sum: e.weight_sum,
                    count: e.count,
                })
                .collect(),
            comment_count: csn.comment_count.clone(),
            total_comments: csn.total_comments,
            seed: csn.seed,
        }
    }
}

impl TryFrom<CsnDocument> for Csn {
    type Error = CsnError;

    fn try_from(doc: CsnDocument) -> Result<Self, Self::Error> {
        let n = doc.subgroups.len();
        let mut csn = Csn::empty(doc.subgroups);
        for e in doc.edges {
            if e.src >= n || e.tgt >= n {
                return Err(CsnError::Format(format!(
                    "edge ({}, {}) outside {n} subgroups",
                    e.src, e.tgt
                )));
            }
            if csn.edges[e.src][e.tgt].is_some() {
                return Err(CsnError::Format(format!("duplicate edge ({}, {})", e.src, e.tgt)));
            }
            csn.edges[e.src][e.tgt] = Some(EdgeStat {
                score: e.score,
                weight_sum: e.weight_sum,
                count: e.count,
            });
        }
        csn.comment_count = doc.comment_count;
        csn.total_comments = doc.total_comments;
        csn.seed = doc.seed;
        csn.validate()?;
        Ok(csn)
    }
}

impl Csn {
    pub fn to_document(&self) -> CsnDocument {
        CsnDocument::from(self)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("network serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, CsnError> {
        let doc: CsnDocument = serde_json::from_str(text).map_err(|e| CsnError::Format(e.to_string()))?;
        Csn::try_from(doc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::clamp_score;
    use proptest::prelude::*;

    const A: usize = 0;
    const B: usize = 1;
    const C: usize = 2;

    fn roster(n: usize) -> Vec<SubgroupId> {
        (0..n)
            .map(|i| SubgroupId::new(i, format!("G{i}"), ""))
            .collect()
    }

    fn trip(stance: Option<usize>, score: f64, target: usize, likes: u64) -> Triplet {
        Triplet {
            comment_id: format!("c-{stance:?}-{target}-{likes}"),
            stance,
            score: clamp_score(score).unwrap(),
            target,
            likes,
        }
    }

    #[test]
    fn accumulate_weights_by_likes() {
        let mut s = BuilderState::new(2, 0);
        s.accumulate_complete(&trip(Some(A), 0.5, A, 3)).unwrap();
        let k = s.at(A, A);
        assert_eq!(s.adj[k], 1.5);
        assert_eq!(s.weight_sum[k], 3.0);
        assert_eq!(s.count[k], 1);
        assert_eq!(s.comment_count[A], 1);
    }

    #[test]
    fn zero_likes_floor_to_one() {
        let mut s = BuilderState::new(2, 0);
        s.accumulate_complete(&trip(Some(A), -0.6, B, 0)).unwrap();
        let k = s.at(A, B);
        assert_eq!(s.adj[k], -0.6);
        assert_eq!(s.weight_sum[k], 1.0);
    }

    #[test]
    fn null_stance_is_deferred() {
        let mut s = BuilderState::new(2, 0);
        s.accumulate_complete(&trip(None, -0.4, B, 1)).unwrap();
        assert_eq!(s.incomplete.len(), 1);
        assert!(s.adj.iter().all(|&v| v == 0.0));
        assert!(s.count.iter().all(|&v| v == 0));
    }

    #[test]
    fn out_of_roster_index_is_rejected() {
        let mut s = BuilderState::new(2, 0);
        let err = s.accumulate_complete(&trip(Some(2), 0.1, A, 1)).unwrap_err();
        assert!(matches!(err, CsnError::IndexError { index: 2, len: 2, .. }));
        let err = s.accumulate_complete(&trip(None, 0.1, 5, 1)).unwrap_err();
        assert!(matches!(err, CsnError::IndexError { index: 5, .. }));
    }

    #[test]
    fn degenerate_imputation_picks_only_observed_stance() {
        let ts = vec![
            trip(Some(A), -0.2, B, 1),
            trip(Some(A), -0.2, B, 1),
            trip(None, -0.4, B, 1),
        ];
        for seed in 0..20 {
            let csn = build_csn(&ts, &roster(3), seed).unwrap();
            csn.validate().unwrap();
            let e = csn.edge(A, B).unwrap();
            assert_eq!(e.count, 3);
            assert!((e.score - (-0.8 / 3.0)).abs() < 1e-12);
            assert_eq!(csn.comment_count, vec![3, 0, 0]);
        }
    }

    #[test]
    fn imputation_is_reproducible_for_fixed_seed() {
        let ts = vec![
            trip(Some(A), -0.5, B, 1),
            trip(Some(C), -0.5, B, 1),
            trip(None, 0.9, B, 1),
        ];
        let first = build_csn(&ts, &roster(3), 1234).unwrap();
        for _ in 0..5 {
            assert_eq!(build_csn(&ts, &roster(3), 1234).unwrap(), first);
        }
        let imputed_into = if first.edge(A, B).unwrap().count == 2 { A } else { C };
        assert_eq!(first.comment_count[imputed_into], 2);
        assert_eq!(first.comment_count[B], 0);
    }

    #[test]
    fn uniform_fallback_when_target_unobserved() {
        // Nothing points at C, so the stance is drawn uniformly over all three.
        let mut hits = [0usize; 3];
        for seed in 0..600 {
            let csn = build_csn(&[trip(None, -0.3, C, 1)], &roster(3), seed).unwrap();
            let src = (0..3).find(|&i| csn.comment_count[i] == 1).unwrap();
            hits[src] += 1;
        }
        for h in hits {
            assert!((150..250).contains(&h), "{hits:?}");
        }
    }

    #[test]
    fn averages_two_observations() {
        let ts = vec![trip(Some(A), -0.6, B, 1), trip(Some(A), -1.0, B, 1)];
        let csn = build_csn(&ts, &roster(2), 0).unwrap();
        csn.validate().unwrap();
        assert!((csn.score(A, B).unwrap() - (-0.8)).abs() < 1e-15);
    }

    #[test]
    fn single_weighted_observation() {
        let csn = build_csn(&[trip(Some(A), 0.5, A, 3)], &roster(2), 0).unwrap();
        csn.validate().unwrap();
        assert_eq!(csn.score(A, A), Some(0.5));
        assert_eq!(csn.score(A, B), None);
        assert_eq!(csn.score(B, A), None);
    }

    #[test]
    fn empty_input_gives_edgeless_network() {
        let csn = build_csn(&[], &roster(3), 9).unwrap();
        csn.validate().unwrap();
        assert_eq!(csn.iter_edges().count(), 0);
        assert_eq!(csn.total_comments, 0);
        assert_eq!(csn.len(), 3);
    }

    #[test]
    fn cohesion_rules() {
        let ts = vec![trip(Some(A), 0.5, A, 1), trip(Some(B), -0.3, B, 1)];
        let csn = build_csn(&ts, &roster(3), 0).unwrap();
        assert_eq!(internal_cohesion(&csn, A).unwrap(), 0.5);
        assert_eq!(internal_cohesion(&csn, B).unwrap(), 0.0);
        assert_eq!(internal_cohesion(&csn, C).unwrap(), 1.0);
        assert_eq!(internal_cohesion_with(&csn, C, MissingCohesion::Half).unwrap(), 0.5);
        assert_eq!(internal_cohesion_with(&csn, C, MissingCohesion::Zero).unwrap(), 0.0);
        // the raw negative self-loop is still stored
        assert_eq!(csn.score(B, B), Some(-0.3));
        assert!(matches!(
            internal_cohesion(&csn, 3),
            Err(CsnError::SubgroupOutOfRange { index: 3, len: 3 })
        ));
    }

    #[test]
    fn document_rejects_bad_edges() {
        let text = r#"{"subgroups":[{"index":0,"label":"A"}],"edges":[{"src":0,"tgt":1,"score":0.1,"weight_sum":1,"count":1}],"comment_count":[1],"total_comments":1}"#;
        assert!(matches!(Csn::from_json(text), Err(CsnError::Format(_))));
    }

    fn arb_triplets() -> impl Strategy<Value = (usize, Vec<Triplet>)> {
        (1usize..=5).prop_flat_map(|n| {
            let t = (
                proptest::option::weighted(0.7, 0..n),
                -1.0f64..=1.0,
                0..n,
                0u64..=10,
            )
                .prop_map(|(s, score, tgt, likes)| trip(s, score, tgt, likes));
            (Just(n), proptest::collection::vec(t, 0..50))
        })
    }

    proptest! {
        #[test]
        fn builds_satisfy_invariants((n, ts) in arb_triplets(), seed in any::<u64>()) {
            let csn = build_csn(&ts, &roster(n), seed).unwrap();
            prop_assert!(csn.validate().is_ok());
            prop_assert_eq!(csn.total_comments, ts.len() as u64);
        }

        #[test]
        fn zero_likes_equal_one_like((n, ts) in arb_triplets(), seed in any::<u64>()) {
            let floored: Vec<Triplet> = ts
                .iter()
                .map(|t| Triplet { likes: if t.likes == 0 { 1 } else { t.likes }, ..t.clone() })
                .collect();
            prop_assert_eq!(
                build_csn(&ts, &roster(n), seed).unwrap(),
                build_csn(&floored, &roster(n), seed).unwrap()
            );
        }

        #[test]
        fn uniform_duplication_preserves_complete_averages(
            (n, ts) in arb_triplets(),
            k in 2usize..=5,
        ) {
            let complete: Vec<Triplet> = ts.into_iter().filter(|t| t.is_complete()).collect();
            let dup: Vec<Triplet> = (0..k).flat_map(|_| complete.iter().cloned()).collect();
            let a = build_csn(&complete, &roster(n), 0).unwrap();
            let b = build_csn(&dup, &roster(n), 0).unwrap();
            for (i, j, e) in a.iter_edges() {
                let d = b.edge(i, j).unwrap();
                prop_assert!((e.score - d.score).abs() < 1e-12);
                prop_assert_eq!(d.count, e.count * k as u64);
            }
            prop_assert_eq!(a.iter_edges().count(), b.iter_edges().count());
        }

        #[test]
        fn document_round_trip_is_bit_exact((n, ts) in arb_triplets(), seed in any::<u64>()) {
            let csn = build_csn(&ts, &roster(n), seed).unwrap();
            let back = Csn::from_json(&csn.to_json_pretty()).unwrap();
            for (i, j, e) in csn.iter_edges() {
                prop_assert_eq!(e.score.to_bits(), back.edge(i, j).unwrap().score.to_bits());
            }
            prop_assert_eq!(csn, back);
        }
    }
}

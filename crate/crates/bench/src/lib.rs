//! Synthetic inputs shared by the benchmarks.

use polarscope_core::model::read_comments_from;
use polarscope_core::{clamp_score, Comment, SubgroupId, Triplet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FIXTURE: &str = include_str!("../../core/fixtures/russia_ukraine_30.jsonl");

pub fn roster(n: usize) -> Vec<SubgroupId> {
    (0..n).map(|i| SubgroupId::new(i, format!("G{i}"), "")).collect()
}

/// `count` triplets over `groups` subgroups; roughly a quarter lack a stance.
pub fn random_triplets(groups: usize, count: usize, seed: u64) -> Vec<Triplet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| Triplet {
            comment_id: format!("t{k}"),
            stance: (rng.gen::<f64>() >= 0.25).then(|| rng.gen_range(0..groups)),
            score: clamp_score(rng.gen_range(-1.0..=1.0)).expect("in range"),
            target: rng.gen_range(0..groups),
            likes: rng.gen_range(0..50),
        })
        .collect()
}

/// The bundled 30-comment corpus repeated `copies` times with distinct ids.
pub fn corpus(copies: usize) -> Vec<Comment> {
    let base = read_comments_from(FIXTURE.as_bytes(), true).expect("fixture parses").comments;
    (0..copies)
        .flat_map(|k| {
            base.iter().map(move |c| Comment {
                id: format!("{}-{k}", c.id),
                ..c.clone()
            })
        })
        .collect()
}

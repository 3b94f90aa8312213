//! Oracles and criterion checks shared by the core integration tests and the
//! acceptance target of the cli crate.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_rational::Ratio;
use polarscope_core::agents::{run_triplet_pipeline, AgentSystem, MockRules, PipelineConfig};
use polarscope_core::coi::coi_with_cohesion;
use polarscope_core::csn::internal_cohesion;
use polarscope_core::eval::{
    f1_exact, f_avg_exact, load_dataset, macro_f1_exact, run_zero_shot_eval, target_counts, ClassTally,
    ConfusionCounts, Dataset, EvalError, EvalOptions, EvalRecord, Stance,
};
use polarscope_core::model::read_comments;
use polarscope_core::{build_csn, clamp_score, coi, Comment, Csn, SubgroupId, Triplet};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub enum Verdict {
    Pass(String),
    Skip(String),
    Fail(String),
}

impl Verdict {
    pub fn unwrap_ok(self) -> String {
        match self {
            Verdict::Pass(m) | Verdict::Skip(m) => m,
            Verdict::Fail(m) => panic!("{m}"),
        }
    }
}

pub fn fixtures_dir() -> PathBuf {
    let here = Path::new(env!("CARGO_MANIFEST_DIR"));
    let own = here.join("fixtures");
    if own.join("russia_ukraine_30.jsonl").exists() {
        own
    } else {
        here.join("../core/fixtures")
    }
}

pub fn load_fixture(name: &str) -> Vec<Comment> {
    read_comments(&fixtures_dir().join(name), true).unwrap().comments
}

pub fn two_group_rules() -> MockRules {
    let rules = std::fs::read_to_string(fixtures_dir().join("two_group_rules.toml")).unwrap();
    MockRules::from_toml(&rules).unwrap()
}

pub fn two_group_system() -> AgentSystem {
    AgentSystem::new(PipelineConfig::mock())
        .unwrap()
        .with_mock_rules(two_group_rules())
}

pub fn roster(n: usize) -> Vec<SubgroupId> {
    (0..n).map(|i| SubgroupId::new(i, format!("G{i}"), "")).collect()
}

// ---------------------------------------------------------------- oracles

fn oracle_stream_seed(seed: u64, stage: &str) -> u64 {
    let digest = Sha256::new()
        .chain_update(seed.to_le_bytes())
        .chain_update(stage.as_bytes())
        .finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

fn oracle_draw(rng: &mut ChaCha8Rng, weights: &[u64]) -> usize {
    let total: u64 = weights.iter().sum();
    let u = (rng.next_u64() >> 11) as f64 / 9_007_199_254_740_992.0;
    let r = ((u * total as f64).floor() as u64).min(total - 1);
    let mut acc = 0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if r < acc {
            return i;
        }
    }
    unreachable!()
}

/// Brute-force network: keeps every observation, recounts stance
/// frequencies from scratch before each imputation and averages at the end.
pub struct OracleCsn {
    pub edges: Vec<Vec<Option<f64>>>,
    pub comment_count: Vec<u64>,
}

pub fn oracle_csn(triplets: &[Triplet], n: usize, seed: u64) -> OracleCsn {
    let mut placed: Vec<(usize, &Triplet)> = triplets
        .iter()
        .filter_map(|t| t.stance.map(|s| (s, t)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(oracle_stream_seed(seed, "csn-imputation"));
    for t in triplets.iter().filter(|t| t.stance.is_none()) {
        let column: Vec<u64> = (0..n)
            .map(|i| placed.iter().filter(|(s, x)| *s == i && x.target == t.target).count() as u64)
            .collect();
        let src = if column.iter().sum::<u64>() == 0 {
            oracle_draw(&mut rng, &vec![1; n])
        } else {
            oracle_draw(&mut rng, &column)
        };
        placed.push((src, t));
    }
    let mut edges = vec![vec![None; n]; n];
    for (i, row) in edges.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let obs: Vec<(f64, f64)> = placed
                .iter()
                .filter(|(s, t)| *s == i && t.target == j)
                .map(|(_, t)| (t.score.value(), t.likes.max(1) as f64))
                .collect();
            if !obs.is_empty() {
                let num: f64 = obs.iter().map(|(s, w)| s * w).sum();
                let den: f64 = obs.iter().map(|(_, w)| w).sum();
                *cell = Some((num / den).clamp(-1.0, 1.0));
            }
        }
    }
    let comment_count = (0..n).map(|i| placed.iter().filter(|(s, _)| *s == i).count() as u64).collect();
    OracleCsn { edges, comment_count }
}

/// The index evaluated term by term from an edge matrix and subgroup sizes.
pub fn oracle_coi(edges: &[Vec<Option<f64>>], sizes: &[u64], cohesion: &[f64]) -> f64 {
    let total: u64 = sizes.iter().sum();
    let mut sum = 0.0;
    for i in 0..sizes.len() {
        let mut hostility = 0.0;
        for (j, e) in edges[i].iter().enumerate() {
            if let Some(e) = e {
                if i != j && *e <= 0.0 {
                    hostility += -e;
                }
            }
        }
        sum += sizes[i] as f64 / total as f64 * cohesion[i] * hostility;
    }
    sum
}

pub fn oracle_cohesion(edges: &[Vec<Option<f64>>]) -> Vec<f64> {
    (0..edges.len()).map(|i| edges[i][i].map_or(1.0, |e| e.max(0.0))).collect()
}

// ----------------------------------------------------- random instances

pub struct Instance {
    pub n: usize,
    pub triplets: Vec<Triplet>,
    pub seed: u64,
}

/// Up to 5 subgroups, up to 50 triplets, likes up to 10 and at least a
/// fifth of the triplets incomplete.
pub fn random_instance(rng: &mut impl Rng, allow_incomplete: bool) -> Instance {
    let n = rng.gen_range(1..=5);
    let m: usize = rng.gen_range(0..=50);
    let min_incomplete = if allow_incomplete { m.div_ceil(5) } else { 0 };
    let k = if allow_incomplete { rng.gen_range(min_incomplete..=m) } else { 0 };
    let mut incomplete = vec![false; m];
    for idx in rand::seq::index::sample(rng, m.max(1), k.min(m)).into_iter() {
        if idx < m {
            incomplete[idx] = true;
        }
    }
    let triplets = (0..m)
        .map(|i| {
            let raw = match rng.gen_range(0..10) {
                0 => 0.0,
                1 => -1.0,
                2 => 1.0,
                _ => rng.gen_range(-1.0..=1.0),
            };
            Triplet {
                comment_id: format!("t{i}"),
                stance: (!incomplete[i]).then(|| rng.gen_range(0..n)),
                score: clamp_score(raw).unwrap(),
                target: rng.gen_range(0..n),
                likes: rng.gen_range(0..=10),
            }
        })
        .collect();
    Instance {
        n,
        triplets,
        seed: rng.gen(),
    }
}

// ------------------------------------------------------------- criteria

pub fn criterion_csn_oracle(instances: usize) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0001);
    let mut worst = 0.0f64;
    for case in 0..instances {
        let inst = random_instance(&mut rng, true);
        let built = match build_csn(&inst.triplets, &roster(inst.n), inst.seed) {
            Ok(c) => c,
            Err(e) => return Verdict::Fail(format!("instance {case}: {e}")),
        };
        let want = oracle_csn(&inst.triplets, inst.n, inst.seed);
        if built.comment_count != want.comment_count {
            return Verdict::Fail(format!(
                "instance {case}: sizes {:?} vs oracle {:?}",
                built.comment_count, want.comment_count
            ));
        }
        for i in 0..inst.n {
            for j in 0..inst.n {
                match (built.score(i, j), want.edges[i][j]) {
                    (None, None) => {}
                    (Some(a), Some(b)) => worst = worst.max((a - b).abs()),
                    (a, b) => return Verdict::Fail(format!("instance {case}: edge ({i},{j}) {a:?} vs oracle {b:?}")),
                }
            }
        }
    }
    if worst <= 1e-9 {
        Verdict::Pass(format!("{instances} instances, max |diff| = {worst:.2e} (tol 1e-9)"))
    } else {
        Verdict::Fail(format!("max |diff| = {worst:.2e} exceeds 1e-9"))
    }
}

pub fn two_group_csn() -> Csn {
    let comments = load_fixture("two_group.jsonl");
    let system = two_group_system();
    let out = run_triplet_pipeline(&comments, &system).unwrap();
    build_csn(&out.triplets, &out.background.subgroups, system.config().seed).unwrap()
}

pub fn criterion_coi_example() -> Verdict {
    let csn = two_group_csn();
    let report = match coi(&csn) {
        Ok(r) => r,
        Err(e) => return Verdict::Fail(e.to_string()),
    };
    let edges: Vec<Vec<Option<f64>>> = (0..csn.len()).map(|i| (0..csn.len()).map(|j| csn.score(i, j)).collect()).collect();
    let oracle = oracle_coi(&edges, &csn.comment_count, &oracle_cohesion(&edges));
    let arithmetic: f64 = 0.6 * 0.9 * 0.8 + 0.4 * 0.6 * 0.5;
    let ok = (report.total - 0.552).abs() <= 1e-9 && (oracle - 0.552).abs() <= 1e-9 && (arithmetic - 0.552).abs() <= 1e-9;
    let msg = format!(
        "pipeline total = {:.12}, oracle = {oracle:.12}, expected 0.552 (tol 1e-9)",
        report.total
    );
    if ok {
        Verdict::Pass(msg)
    } else {
        Verdict::Fail(msg)
    }
}

fn random_csn(rng: &mut ChaCha8Rng) -> (Instance, Csn) {
    loop {
        let inst = random_instance(rng, true);
        let csn = build_csn(&inst.triplets, &roster(inst.n), inst.seed).unwrap();
        if csn.total_comments > 0 {
            return (inst, csn);
        }
    }
}

fn cohesion_vec(csn: &Csn) -> Vec<f64> {
    (0..csn.len()).map(|i| internal_cohesion(csn, i).unwrap()).collect()
}

pub fn criterion_coi_properties(cases: usize) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0003);
    let mut failures = Vec::new();

    for case in 0..cases {
        let (_, csn) = random_csn(&mut rng);
        let base = coi(&csn).unwrap().total;
        let ub = csn.len().saturating_sub(1) as f64;
        if base.is_nan() || base < 0.0 || base > ub + 1e-12 {
            failures.push(format!("non-negativity/bound case {case}: {base}"));
        }

        let t = cohesion_vec(&csn);
        for lambda in [0.0, 0.25, 0.5, 1.0, rng.gen_range(0.0..=1.0)] {
            let scaled: Vec<f64> = t.iter().map(|x| x * lambda).collect();
            let got = coi_with_cohesion(&csn, &scaled).unwrap().total;
            let want = lambda * base;
            let exact_power_of_two = lambda == 0.0 || lambda == 0.25 || lambda == 0.5 || lambda == 1.0;
            let ok = if exact_power_of_two { got == want } else { (got - want).abs() <= 1e-12 };
            if !ok {
                failures.push(format!("cohesion scaling case {case}: lambda {lambda}, {got} vs {want}"));
            }
        }

        let negatives: Vec<(usize, usize)> = csn
            .iter_edges()
            .filter(|(i, j, e)| i != j && e.score < 0.0)
            .map(|(i, j, _)| (i, j))
            .collect();
        if let Some(&(i, j)) = negatives.first() {
            let mut harsher = csn.clone();
            let e = harsher.edges[i][j].as_mut().unwrap();
            e.score = (e.score - rng.gen_range(0.0..=1.0)).max(-1.0);
            let after = coi(&harsher).unwrap().total;
            if after < base {
                failures.push(format!("monotonicity case {case}: {after} < {base}"));
            }
        }
    }

    for case in 0..cases {
        let inst = random_instance(&mut rng, false);
        let subgroups = roster(inst.n);
        let csn = build_csn(&inst.triplets, &subgroups, inst.seed).unwrap();
        if csn.total_comments == 0 {
            continue;
        }
        let base = coi(&csn).unwrap().total;
        for k in [2usize, 3, 5] {
            let dup: Vec<Triplet> = inst
                .triplets
                .iter()
                .flat_map(|t| std::iter::repeat(t.clone()).take(k))
                .collect();
            let got = coi(&build_csn(&dup, &subgroups, inst.seed).unwrap()).unwrap().total;
            if (got - base).abs() > 1e-12 {
                failures.push(format!("duplication case {case}: k={k}, {got} vs {base}"));
            }
        }
    }

    let comments = load_fixture("two_group.jsonl");
    let system = two_group_system();
    let pipeline_coi = |cs: &[Comment]| {
        let out = run_triplet_pipeline(cs, &system).unwrap();
        coi(&build_csn(&out.triplets, &out.background.subgroups, system.config().seed).unwrap())
            .unwrap()
            .total
    };
    let base = pipeline_coi(&comments);
    for k in [2usize, 3, 5] {
        let dup: Vec<Comment> = comments
            .iter()
            .flat_map(|c| {
                (0..k).map(move |r| Comment {
                    id: format!("{}-{r}", c.id),
                    ..c.clone()
                })
            })
            .collect();
        let got = pipeline_coi(&dup);
        if (got - base).abs() > 1e-12 {
            failures.push(format!("end-to-end duplication k={k}: {got} vs {base}"));
        }
    }

    if failures.is_empty() {
        Verdict::Pass(format!(
            "{cases} random networks x (non-negativity, cohesion scaling, monotonicity), {cases} x duplication k in {{2,3,5}}, end-to-end duplication"
        ))
    } else {
        Verdict::Fail(format!("{} violations, first: {}", failures.len(), failures[0]))
    }
}

/// Confusion matrices (`[gold][predicted]`, Favor/Against/None) with
/// per-class F1, F_avg and Macro-F1 worked out by hand, as `(numer, denom)`.
pub type MetricFixture = (&'static str, [[u64; 3]; 3], [(u64, u64); 3], (u64, u64), (u64, u64));

pub const METRIC_FIXTURES: &[MetricFixture] = &[
    ("perfect", [[5, 0, 0], [0, 3, 0], [0, 0, 2]], [(1, 1), (1, 1), (1, 1)], (1, 1), (1, 1)),
    ("all predictions None", [[0, 0, 3], [0, 0, 2], [0, 0, 1]], [(0, 1), (0, 1), (2, 7)], (0, 1), (2, 21)),
    ("precision = recall = 2/3", [[2, 1, 0], [1, 2, 0], [0, 0, 0]], [(2, 3), (2, 3), (0, 1)], (2, 3), (4, 9)),
    ("F1 0.8 and 0.6", [[2, 0, 1], [0, 3, 2], [0, 2, 1]], [(4, 5), (3, 5), (2, 7)], (7, 10), (59, 105)),
    ("neutral absent and never predicted", [[3, 1, 0], [1, 3, 0], [0, 0, 0]], [(3, 4), (3, 4), (0, 1)], (3, 4), (1, 2)),
    ("empty", [[0, 0, 0], [0, 0, 0], [0, 0, 0]], [(0, 1), (0, 1), (0, 1)], (0, 1), (0, 1)),
    ("false positives only", [[0, 0, 0], [0, 0, 0], [5, 0, 0]], [(0, 1), (0, 1), (0, 1)], (0, 1), (0, 1)),
    ("asymmetric", [[4, 1, 1], [2, 5, 0], [1, 1, 3]], [(8, 13), (5, 7), (2, 3)], (121, 182), (545, 819)),
    ("single Against", [[0, 0, 0], [0, 1, 0], [0, 0, 0]], [(0, 1), (1, 1), (0, 1)], (1, 2), (1, 3)),
    ("None predictions are misses", [[0, 0, 2], [0, 2, 0], [0, 0, 0]], [(0, 1), (1, 1), (0, 1)], (1, 2), (1, 3)),
    ("large", [[50, 10, 5], [7, 80, 13], [3, 9, 23]], [(4, 5), (160, 199), (23, 38)], (798, 995), (83533, 113430)),
    ("Favor never gold", [[0, 0, 0], [2, 4, 0], [1, 0, 3]], [(0, 1), (4, 5), (6, 7)], (2, 5), (58, 105)),
];

pub fn criterion_metric_fixtures() -> Verdict {
    let r = |(n, d): (u64, u64)| Ratio::new(n, d);
    let mut checked = 0;
    let scalar = [((10, 0, 0), (1, 1)), ((2, 1, 1), (2, 3)), ((0, 5, 0), (0, 1)), ((0, 0, 0), (0, 1)), ((0, 0, 7), (0, 1))];
    for ((tp, fp, fn_), want) in scalar {
        if f1_exact(tp, fp, fn_) != r(want) {
            return Verdict::Fail(format!("f1({tp},{fp},{fn_}) = {} != {}/{}", f1_exact(tp, fp, fn_), want.0, want.1));
        }
        checked += 1;
    }
    for (name, matrix, per_class, favg, macro_) in METRIC_FIXTURES {
        let c = ConfusionCounts { matrix: *matrix };
        for (k, s) in Stance::ALL.iter().enumerate() {
            let cc = c.class(*s);
            if f1_exact(cc.tp, cc.fp, cc.fn_) != r(per_class[k]) {
                return Verdict::Fail(format!("{name}: F1 {s} mismatch"));
            }
            let gold: u64 = matrix[k].iter().sum();
            if cc.tp + cc.fn_ != gold {
                return Verdict::Fail(format!("{name}: label conservation broken for {s}"));
            }
        }
        if f_avg_exact(&c) != r(*favg) {
            return Verdict::Fail(format!("{name}: F_avg {} != {}/{}", f_avg_exact(&c), favg.0, favg.1));
        }
        if macro_f1_exact(&c) != r(*macro_) {
            return Verdict::Fail(format!("{name}: Macro-F1 {} != {}/{}", macro_f1_exact(&c), macro_.0, macro_.1));
        }
        checked += 1;
    }
    Verdict::Pass(format!("{checked} fixtures exact in rational arithmetic ({} confusion matrices)", METRIC_FIXTURES.len()))
}

/// Per-target Pro/Con/Neutral counts quoted in the dataset statistics table.
pub const PUBLISHED_CLASS_COUNTS: &[(Dataset, &str, ClassTally)] = &[
    (Dataset::Sem16, "Donald Trump", ClassTally { favor: 148, against: 299, none: 260 }),
    (Dataset::Sem16, "Hillary Clinton", ClassTally { favor: 163, against: 565, none: 256 }),
    (Dataset::Sem16, "Feminist Movement", ClassTally { favor: 268, against: 511, none: 170 }),
    (Dataset::Sem16, "Legalization of Abortion", ClassTally { favor: 167, against: 544, none: 222 }),
    (Dataset::Sem16, "Atheism", ClassTally { favor: 124, against: 464, none: 145 }),
    (Dataset::Sem16, "Climate Change is a Real Concern", ClassTally { favor: 335, against: 26, none: 203 }),
    (Dataset::PStance, "Joe Biden", ClassTally { favor: 3217, against: 4079, none: 0 }),
    (Dataset::PStance, "Bernie Sanders", ClassTally { favor: 3551, against: 2774, none: 0 }),
    (Dataset::PStance, "Donald Trump", ClassTally { favor: 3663, against: 4290, none: 0 }),
    (Dataset::Vast, "*", ClassTally { favor: 6952, against: 7297, none: 4296 }),
];

fn data_files(dir: &Path) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map(|rd| rd.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.is_file()).collect())
        .unwrap_or_default();
    files.sort();
    files
}

/// Expects `<dir>/sem16`, `<dir>/pstance` and `<dir>/vast`, each holding the
/// official files of every split. Missing subdirectories are skipped.
pub fn criterion_class_counts(dir: Option<PathBuf>) -> Verdict {
    let Some(dir) = dir else {
        return Verdict::Skip("POLARSCOPE_DATA_DIR not set; official dataset files absent".into());
    };
    let mut checked = 0;
    let mut present = Vec::new();
    for (dataset, sub) in [(Dataset::Sem16, "sem16"), (Dataset::PStance, "pstance"), (Dataset::Vast, "vast")] {
        let files = data_files(&dir.join(sub));
        if files.is_empty() {
            continue;
        }
        present.push(sub);
        let mut records: Vec<EvalRecord> = Vec::new();
        for f in &files {
            match load_dataset(f, dataset) {
                Ok(r) => records.extend(r),
                Err(e) => return Verdict::Fail(e.to_string()),
            }
        }
        let counts = target_counts(&records);
        let mut all = ClassTally::default();
        for t in counts.values() {
            all.favor += t.favor;
            all.against += t.against;
            all.none += t.none;
        }
        for (d, target, want) in PUBLISHED_CLASS_COUNTS.iter().filter(|(d, _, _)| *d == dataset) {
            let got = if *target == "*" {
                all
            } else {
                let key = counts.keys().find(|k| k.eq_ignore_ascii_case(target));
                match key {
                    Some(k) => counts[k],
                    None => return Verdict::Fail(format!("{d}: target `{target}` not found in {}", dir.join(sub).display())),
                }
            };
            if got != *want {
                return Verdict::Fail(format!("{d} {target}: got {got:?}, table says {want:?}"));
            }
            checked += 1;
        }
    }
    if present.is_empty() {
        Verdict::Skip(format!("no dataset files under {}", dir.display()))
    } else {
        Verdict::Pass(format!("{checked} target rows match ({})", present.join(", ")))
    }
}

pub fn load_eval_fixture() -> Vec<EvalRecord> {
    load_dataset(&fixtures_dir().join("stance_sem16_12.tsv"), Dataset::Sem16).unwrap()
}

pub fn criterion_conservation_and_resume(scratch: &Path) -> Verdict {
    std::fs::create_dir_all(scratch).unwrap();
    let system = AgentSystem::new(PipelineConfig::mock()).unwrap();
    let mut notes = Vec::new();
    for (name, sys) in [
        ("russia_ukraine_30.jsonl", system.clone()),
        ("two_group.jsonl", two_group_system()),
        ("two_group_slices.jsonl", two_group_system()),
    ] {
        let comments = load_fixture(name);
        let out = run_triplet_pipeline(&comments, &sys).unwrap();
        if out.triplets.len() + out.skipped.len() != comments.len() {
            return Verdict::Fail(format!(
                "{name}: {} triplets + {} skipped != {} comments",
                out.triplets.len(),
                out.skipped.len(),
                comments.len()
            ));
        }
        notes.push(format!("{name} {}+{}={}", out.triplets.len(), out.skipped.len(), comments.len()));
    }

    let records = load_eval_fixture();
    let whole = run_zero_shot_eval(&records, &system, 0.1, &EvalOptions::default()).unwrap();
    let cp = scratch.join("eval.ckpt.json");
    let _ = std::fs::remove_file(&cp);
    let first = run_zero_shot_eval(
        &records,
        &system,
        0.1,
        &EvalOptions {
            checkpoint: Some(cp.clone()),
            stop_after: Some(6),
            ..Default::default()
        },
    );
    if !matches!(first, Err(EvalError::Interrupted { processed: 6 })) || !cp.exists() {
        return Verdict::Fail(format!("interrupted run did not stop at record 6 with a checkpoint: {first:?}"));
    }
    let resumed = run_zero_shot_eval(
        &records,
        &system,
        0.1,
        &EvalOptions {
            checkpoint: Some(cp.clone()),
            ..Default::default()
        },
    )
    .unwrap();
    if resumed != whole {
        return Verdict::Fail("resumed eval report differs from the uninterrupted one".into());
    }
    if serde_json::to_string(&resumed).unwrap() != serde_json::to_string(&whole).unwrap() {
        return Verdict::Fail("resumed eval report serializes differently".into());
    }
    notes.push("eval killed at 6/12 and resumed: identical report".into());
    Verdict::Pass(notes.join("; "))
}

/// Gold and expected mock prediction for each record of the 12-record
/// stance fixture, traced by hand through the bundled lexicon.
pub const EVAL_FIXTURE_TRACE: [(Stance, Stance); 12] = [
    (Stance::Favor, Stance::Favor),     // save +0.7
    (Stance::Favor, Stance::Favor),     // honest +0.5, brave +0.7
    (Stance::Against, Stance::Against), // lies -0.6, liars -0.7
    (Stance::None, Stance::None),       // no lexicon hit
    (Stance::Against, Stance::Against), // "oh sure" flips honest +0.5
    (Stance::None, Stance::Favor),      // hope +0.4
    (Stance::Favor, Stance::Against),   // evil -0.9, stupid -0.6
    (Stance::None, Stance::None),       // no lexicon hit
    (Stance::Against, Stance::Favor),   // hope +0.4
    (Stance::Against, Stance::Favor),   // love +0.6
    (Stance::Favor, Stance::Favor),     // brave +0.7, honest +0.5
    (Stance::None, Stance::Against),    // weak -0.4
];

pub fn tally(pairs: &[(Stance, Stance)]) -> BTreeMap<(Stance, Stance), usize> {
    let mut m = BTreeMap::new();
    for p in pairs {
        *m.entry(*p).or_default() += 1;
    }
    m
}

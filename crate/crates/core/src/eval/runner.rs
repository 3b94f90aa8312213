use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{f_avg_exact, macro_f1_exact};
use super::{ConfusionCounts, Dataset, EvalError, EvalRecord, Stance};
use crate::agents::{AgentError, AgentRole, AgentSystem, Background, Backend};
use crate::seed::{fingerprint, stage_rng};

#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    /// Evaluate a seeded sample of this many records instead of all.
    pub limit: Option<usize>,
    /// Progress file; an existing matching file is resumed.
    pub checkpoint: Option<PathBuf>,
    /// Stop with [`EvalError::Interrupted`] once this many records have been
    /// scored in this invocation, leaving the checkpoint in place.
    pub stop_after: Option<usize>,
    /// Overrides the hash embedded in the report.
    pub config_hash: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalFailure {
    /// Position in the input record list.
    pub index: usize,
    pub target: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetReport {
    pub target: String,
    pub records: u64,
    pub confusion: ConfusionCounts,
    pub f_avg: f64,
    pub macro_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config_hash: String,
    pub dataset: Dataset,
    /// `f_avg` or `macro_f1`.
    pub metric: String,
    pub tau: f64,
    /// Threshold actually applied; zero for datasets without a neutral class.
    pub effective_tau: f64,
    pub model_names: BTreeMap<String, String>,
    pub records_total: usize,
    pub evaluated: usize,
    pub scored: usize,
    pub failure_count: usize,
    pub failures: Vec<EvalFailure>,
    pub partial: bool,
    pub overall: ConfusionCounts,
    pub score: f64,
    /// `score` as an exact fraction.
    pub score_exact: String,
    pub per_target: Vec<TargetReport>,
}

impl EvalReport {
    pub fn status(&self) -> &'static str {
        if self.partial {
            "PARTIAL"
        } else {
            "COMPLETE"
        }
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} zero-shot stance detection ({}), tau {} (applied {}), {} of {} records, {} failures, {}",
            self.dataset,
            self.metric,
            self.tau,
            self.effective_tau,
            self.evaluated,
            self.records_total,
            self.failure_count,
            self.status()
        );
        let _ = writeln!(out, "{:<40} {:>7} {:>8} {:>8}", "target", "records", "F_avg", "MacroF1");
        for t in &self.per_target {
            let _ = writeln!(out, "{:<40} {:>7} {:>8.4} {:>8.4}", t.target, t.records, t.f_avg, t.macro_f1);
        }
        let _ = writeln!(out, "{:<40} {:>7} {:>8.4}", format!("overall {}", self.metric), self.scored, self.score);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Outcome {
    index: usize,
    predicted: Option<Stance>,
    error: Option<String>,
}

/// Progress of an evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalCheckpoint {
    pub config_hash: String,
    pub records_digest: String,
    pub backgrounds: BTreeMap<String, Background>,
    outcomes: Vec<Outcome>,
}

impl EvalCheckpoint {
    fn load(path: &Path) -> Result<Option<Self>, EvalError> {
        match std::fs::read_to_string(path) {
            Ok(t) => serde_json::from_str(&t)
                .map(Some)
                .map_err(|e| EvalError::Checkpoint(format!("{}: {e}", path.display()))),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    fn save(&self, path: &Path) -> Result<(), EvalError> {
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, serde_json::to_vec_pretty(self).map_err(io::Error::from)?)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }
}

fn selected_indices(n: usize, limit: Option<usize>, seed: u64) -> Vec<usize> {
    match limit {
        Some(k) if k < n => {
            let mut rng = stage_rng(seed, "eval-sample");
            let mut picked = sample(&mut rng, n, k).into_vec();
            picked.sort_unstable();
            picked
        }
        _ => (0..n).collect(),
    }
}

fn first_appearance_targets<'a>(records: &'a [EvalRecord], picked: &[usize]) -> Vec<&'a str> {
    let mut out: Vec<&str> = Vec::new();
    for &i in picked {
        if !out.contains(&records[i].target.as_str()) {
            out.push(&records[i].target);
        }
    }
    out
}

/// Scores every selected record with the explorer-free pipeline and
/// aggregates per-target confusion counts. Records whose analysis fails are
/// excluded and listed; the report is then marked partial.
pub fn run_zero_shot_eval(
    records: &[EvalRecord],
    system: &AgentSystem,
    tau: f64,
    options: &EvalOptions,
) -> Result<EvalReport, EvalError> {
    if !(0.0..1.0).contains(&tau) {
        return Err(EvalError::InvalidTau(tau));
    }
    if records.is_empty() || options.limit == Some(0) {
        return Err(EvalError::EmptyEval);
    }
    let dataset = records[0].dataset;
    if let Some(r) = records.iter().find(|r| r.dataset != dataset) {
        return Err(EvalError::MixedDatasets(dataset, r.dataset));
    }
    let effective_tau = if dataset == Dataset::PStance { 0.0 } else { tau };
    let config = system.config();
    let picked = selected_indices(records.len(), options.limit, config.seed);
    let config_hash = options
        .config_hash
        .clone()
        .unwrap_or_else(|| fingerprint(&(config.fingerprint(), tau, options.limit)));
    let digest = fingerprint(&picked.iter().map(|&i| &records[i]).collect::<Vec<_>>());

    let resumed = match &options.checkpoint {
        Some(p) => EvalCheckpoint::load(p)?,
        None => None,
    };
    let mut state = match resumed {
        Some(cp) => {
            if cp.config_hash != config_hash || cp.records_digest != digest {
                return Err(EvalError::Checkpoint(
                    "checkpoint was written by a different configuration or record set; remove it to start over"
                        .into(),
                ));
            }
            cp
        }
        None => {
            let mut backgrounds = BTreeMap::new();
            for target in first_appearance_targets(records, &picked) {
                let texts: Vec<&str> = picked
                    .iter()
                    .filter(|&&i| records[i].target == target)
                    .map(|&i| records[i].text.as_str())
                    .collect();
                backgrounds.insert(target.to_string(), system.target_background(target, &texts)?);
            }
            EvalCheckpoint {
                config_hash: config_hash.clone(),
                records_digest: digest,
                backgrounds,
                outcomes: Vec::new(),
            }
        }
    };

    let workers = config.workers.max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| EvalError::Agent(AgentError::Config(e.to_string())))?;
    let batch = workers * 8;
    let mut processed = 0usize;

    while state.outcomes.len() < picked.len() {
        let start = state.outcomes.len();
        let mut end = (start + batch).min(picked.len());
        if let Some(stop) = options.stop_after {
            if processed >= stop {
                if let Some(p) = &options.checkpoint {
                    state.save(p)?;
                }
                return Err(EvalError::Interrupted {
                    processed: state.outcomes.len(),
                });
            }
            end = end.min(start + stop - processed);
        }
        let score = |&i: &usize| -> Result<Outcome, EvalError> {
            let r = &records[i];
            let background = &state.backgrounds[&r.target];
            match system.detect_stance_with_background(&r.text, background, effective_tau) {
                Ok(s) => Ok(Outcome {
                    index: i,
                    predicted: Some(s),
                    error: None,
                }),
                Err(e @ (AgentError::StageFailure { .. } | AgentError::EmptyText(_))) => Ok(Outcome {
                    index: i,
                    predicted: None,
                    error: Some(e.to_string()),
                }),
                Err(e) => Err(e.into()),
            }
        };
        let chunk = &picked[start..end];
        let results: Vec<Result<Outcome, EvalError>> = if workers == 1 {
            chunk.iter().map(score).collect()
        } else {
            pool.install(|| chunk.par_iter().map(score).collect())
        };
        for r in results {
            match r {
                Ok(o) => state.outcomes.push(o),
                Err(e) => {
                    if let Some(p) = &options.checkpoint {
                        state.save(p)?;
                    }
                    return Err(e);
                }
            }
        }
        processed += end - start;
        if let Some(p) = &options.checkpoint {
            state.save(p)?;
        }
    }

    let report = aggregate(records, &state, dataset, tau, effective_tau, config_hash, system);
    if let Some(p) = &options.checkpoint {
        match std::fs::remove_file(p) {
            Err(e) if e.kind() != io::ErrorKind::NotFound => return Err(e.into()),
            _ => {}
        }
    }
    Ok(report)
}

fn aggregate(
    records: &[EvalRecord],
    state: &EvalCheckpoint,
    dataset: Dataset,
    tau: f64,
    effective_tau: f64,
    config_hash: String,
    system: &AgentSystem,
) -> EvalReport {
    let mut per_target: Vec<(String, ConfusionCounts)> = Vec::new();
    let mut failures = Vec::new();
    for o in &state.outcomes {
        let r = &records[o.index];
        match o.predicted {
            Some(p) => {
                let slot = match per_target.iter().position(|(t, _)| *t == r.target) {
                    Some(k) => k,
                    None => {
                        per_target.push((r.target.clone(), ConfusionCounts::default()));
                        per_target.len() - 1
                    }
                };
                per_target[slot].1.record(r.gold, p);
            }
            None => failures.push(EvalFailure {
                index: o.index,
                target: r.target.clone(),
                message: o.error.clone().unwrap_or_default(),
            }),
        }
    }
    let mut overall = ConfusionCounts::default();
    for (_, c) in &per_target {
        overall.merge(c);
    }
    let (metric, exact) = match dataset {
        Dataset::Vast => ("macro_f1", macro_f1_exact(&overall)),
        _ => ("f_avg", f_avg_exact(&overall)),
    };
    let model_names = AgentRole::ALL
        .iter()
        .filter(|&&r| r != AgentRole::SubgroupExplorer)
        .map(|&r| {
            let a = system.config().agent(r);
            let name = match a.backend {
                Backend::Mock => "mock".to_string(),
                Backend::RemoteChat => a.model_name.clone(),
            };
            (r.key().to_string(), name)
        })
        .collect();
    EvalReport {
        config_hash,
        dataset,
        metric: metric.into(),
        tau,
        effective_tau,
        model_names,
        records_total: records.len(),
        evaluated: state.outcomes.len(),
        scored: overall.total() as usize,
        failure_count: failures.len(),
        partial: !failures.is_empty(),
        failures,
        score: *exact.numer() as f64 / *exact.denom() as f64,
        score_exact: format!("{}/{}", exact.numer(), exact.denom()),
        overall,
        per_target: per_target
            .into_iter()
            .map(|(target, c)| TargetReport {
                target,
                records: c.total(),
                f_avg: super::f_avg(&c),
                macro_f1: super::macro_f1(&c),
                confusion: c,
            })
            .collect(),
    }
}

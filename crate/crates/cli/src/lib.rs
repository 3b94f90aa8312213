//! Command-line surface over `polarscope-core`.
//!
//! Each subcommand reads and writes plain files so that a run can be split
//! across processes: `analyze` produces `triplets.jsonl` and
//! `background.json`, `build-csn` turns triplets into `csn.json`, and `coi`,
//! `export-dot` and `series` report on networks. Failures print one JSON
//! object on stderr and exit nonzero.

pub mod artifacts;
pub mod commands;
pub mod config;

use std::io::{BufRead, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use polarscope_core::agents::{AgentError, Backend, ReviewMode};
use polarscope_core::csn::MissingCohesion;
use polarscope_core::eval::EvalError;
use polarscope_core::{CoiError, CsnError, Dataset, ModelError};
use serde::de::DeserializeOwned;
use thiserror::Error;

pub use config::{Overrides, RunConfig, Settings};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Input { path: String, message: String },
    #[error("{artifact} was written under config hash {found}; this run has {expected}")]
    HashMismatch {
        artifact: String,
        expected: String,
        found: String,
    },
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Csn(#[from] CsnError),
    #[error(transparent)]
    Coi(#[from] CoiError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// `SomeVariant { .. }` as `some_variant`.
fn variant_name(debug: &str) -> String {
    let head = debug.split(|c: char| !c.is_ascii_alphanumeric()).next().unwrap_or("");
    let mut out = String::new();
    for (i, c) in head.chars().enumerate() {
        if c.is_ascii_uppercase() && i > 0 {
            out.push('_');
        }
        out.push(c.to_ascii_lowercase());
    }
    out
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Input { .. } | CliError::Model(_) => "input",
            CliError::HashMismatch { .. } => "hash_mismatch",
            CliError::Agent(_) => "pipeline",
            CliError::Csn(_) => "network",
            CliError::Coi(_) => "metric",
            CliError::Eval(_) => "eval",
            CliError::Io(_) => "io",
        }
    }

    /// The innermost error variant, e.g. `empty_network`.
    pub fn kind(&self) -> String {
        match self {
            CliError::Agent(e) => variant_name(&format!("{e:?}")),
            CliError::Csn(e) => variant_name(&format!("{e:?}")),
            CliError::Coi(CoiError::Csn(e)) => variant_name(&format!("{e:?}")),
            CliError::Coi(e) => variant_name(&format!("{e:?}")),
            CliError::Eval(EvalError::Agent(e)) => variant_name(&format!("{e:?}")),
            CliError::Eval(e) => variant_name(&format!("{e:?}")),
            CliError::Model(e) => variant_name(&format!("{e:?}")),
            other => other.category().to_string(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Input { .. } | CliError::Model(_) => 3,
            CliError::HashMismatch { .. } => 4,
            CliError::Agent(_) => 5,
            CliError::Csn(_) | CliError::Coi(_) => 6,
            CliError::Eval(_) => 7,
            CliError::Io(_) => 8,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": {
                "category": self.category(),
                "kind": self.kind(),
                "message": self.to_string(),
                "exit_code": self.exit_code(),
            }
        })
        .to_string()
    }
}

/// Parses a serde enum from its snake_case name, accepting dashes.
fn parse_enum<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.replace('-', "_"))).map_err(|e| e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "polarscope", version, about = "Group polarization analysis of comment corpora")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags that override the configuration file.
#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Backend for every role not configured otherwise: mock or remote-chat.
    #[arg(long, global = true, value_parser = parse_enum::<Backend>)]
    pub backend: Option<Backend>,
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true)]
    pub max_subgroups: Option<usize>,
    #[arg(long, global = true)]
    pub uncertain_threshold: Option<usize>,
    #[arg(long, global = true)]
    pub sample_size: Option<usize>,
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    /// Slice width for `series`, e.g. `12h` or `1day`.
    #[arg(long, global = true)]
    pub window: Option<String>,
    /// Cohesion for subgroups without a self-loop: one, half or zero.
    #[arg(long, global = true, value_parser = parse_enum::<MissingCohesion>)]
    pub missing_cohesion: Option<MissingCohesion>,
    /// file or interactive.
    #[arg(long, global = true, value_parser = parse_enum::<ReviewMode>)]
    pub review_mode: Option<ReviewMode>,
    #[arg(long, global = true)]
    pub prompts_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub mock_rules: Option<PathBuf>,
    /// Progress file for `analyze` and `eval`; resumed when present.
    #[arg(long, global = true)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long, global = true)]
    pub review_file: Option<PathBuf>,
    /// Log to stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

impl GlobalArgs {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            backend: self.backend,
            workers: self.workers,
            max_subgroups: self.max_subgroups,
            uncertain_threshold: self.uncertain_threshold,
            sample_size: self.sample_size,
            tau: self.tau,
            window: self.window.clone(),
            missing_cohesion: self.missing_cohesion,
            review_mode: self.review_mode,
            prompts_dir: self.prompts_dir.clone(),
            mock_rules: self.mock_rules.clone(),
            checkpoint: self.checkpoint.clone(),
            review_file: self.review_file.clone(),
        }
    }

    pub fn settings(&self) -> Result<Settings, CliError> {
        let mut run = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        run.apply(&self.overrides());
        Settings::resolve(run)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract triplets from a comments file.
    Analyze {
        /// Comments, one JSON object per line.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Fail on the first malformed line instead of skipping it.
        #[arg(long)]
        strict: bool,
    },
    /// Build the community sentiment network from triplets.
    BuildCsn {
        #[arg(long)]
        triplets: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Community opposition index of a network.
    Coi {
        #[arg(long)]
        csn: PathBuf,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Index per time slice of a comments file.
    Series {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        json: bool,
    },
    /// Zero-shot stance detection on a benchmark.
    Eval {
        /// sem16, pstance or vast.
        #[arg(long)]
        dataset: Dataset,
        /// Dataset files in the benchmark's published layout.
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Evaluate a seeded sample of this many records.
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
        /// Stop after scoring this many records, keeping the checkpoint.
        #[arg(long, hide = true)]
        stop_after: Option<usize>,
    },
    /// Render a network as Graphviz DOT.
    ExportDot {
        #[arg(long)]
        csn: PathBuf,
        /// Defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Resolve queued review items, or merge resolutions into triplets.
    Review {
        #[arg(long)]
        queue: PathBuf,
        #[arg(long)]
        triplets: PathBuf,
        /// Merge resolutions instead of prompting.
        #[arg(long)]
        apply: bool,
    },
}

/// Runs `cli`, reading review answers from `input` and writing reports to
/// `output`.
pub fn run(cli: &Cli, input: &mut dyn BufRead, output: &mut dyn Write) -> Result<(), CliError> {
    let settings = cli.global.settings()?;
    commands::dispatch(&cli.command, &settings, input, output)
}

//! Run configuration: a TOML file, then flag overrides, then credentials
//! from the environment.
//!
//! ```toml
//! seed = 7
//! backend = "mock"            # default for every role
//! tau = 0.1
//! window = "1day"
//!
//! [paths]
//! mock_rules = "rules.toml"
//!
//! [agents.polarization_assessor]
//! backend = "remote_chat"
//! model = "gpt-4"
//! api_key = "${OPENAI_API_KEY}"
//! ```
//!
//! `${VAR}` is expanded in `api_key` only; a literal key is refused so that
//! credentials never sit in a config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use polarscope_core::agents::{AgentConfig, AgentRole, AgentSystem, Backend, MockRules, PipelineConfig, PromptSet, ReviewMode};
use polarscope_core::csn::MissingCohesion;
use polarscope_core::eval::DEFAULT_TAU;
use polarscope_core::model::DEFAULT_MAX_SUBGROUPS;
use polarscope_core::seed::fingerprint;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub sample_size: usize,
    pub max_subgroups: usize,
    pub uncertain_threshold: usize,
    pub workers: usize,
    pub deterministic: bool,
    pub tau: f64,
    /// Series window in humantime notation (`12h`, `1day`, `1week`).
    pub window: String,
    pub missing_cohesion: MissingCohesion,
    pub review_mode: ReviewMode,
    pub backend: Backend,
    pub paths: Paths,
    pub agents: BTreeMap<AgentRole, AgentOverride>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let base = PipelineConfig::mock();
        RunConfig {
            seed: base.seed,
            sample_size: base.sample_size,
            max_subgroups: DEFAULT_MAX_SUBGROUPS,
            uncertain_threshold: base.uncertain_threshold,
            workers: 1,
            deterministic: true,
            tau: DEFAULT_TAU,
            window: "1day".into(),
            missing_cohesion: MissingCohesion::One,
            review_mode: ReviewMode::File,
            backend: Backend::Mock,
            paths: Paths::default(),
            agents: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub prompts_dir: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub review_file: Option<PathBuf>,
    pub mock_rules: Option<PathBuf>,
}

/// Per-role settings; unset fields keep the role defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentOverride {
    pub backend: Option<Backend>,
    pub model: Option<String>,
    pub temperature: Option<f64>,
    pub max_retries: Option<u32>,
    pub timeout_secs: Option<f64>,
    pub url: Option<String>,
    pub api_key_env: Option<String>,
    pub api_key: Option<String>,
    pub requests_per_minute: Option<u32>,
    pub backoff_base_ms: Option<u64>,
    pub backoff_max_ms: Option<u64>,
}

/// Flag values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub backend: Option<Backend>,
    pub workers: Option<usize>,
    pub max_subgroups: Option<usize>,
    pub uncertain_threshold: Option<usize>,
    pub sample_size: Option<usize>,
    pub tau: Option<f64>,
    pub window: Option<String>,
    pub missing_cohesion: Option<MissingCohesion>,
    pub review_mode: Option<ReviewMode>,
    pub prompts_dir: Option<PathBuf>,
    pub mock_rules: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub review_file: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = &o.$field {
                    self.$field = v.clone();
                }
            )*};
        }
        set!(seed, backend, workers, max_subgroups, uncertain_threshold, sample_size, tau, window, missing_cohesion, review_mode);
        for (slot, v) in [
            (&mut self.paths.prompts_dir, &o.prompts_dir),
            (&mut self.paths.mock_rules, &o.mock_rules),
            (&mut self.paths.checkpoint, &o.checkpoint),
            (&mut self.paths.review_file, &o.review_file),
        ] {
            if v.is_some() {
                slot.clone_from(v);
            }
        }
    }

    pub fn window(&self) -> Result<Duration, CliError> {
        humantime::parse_duration(&self.window).map_err(|e| CliError::Config(format!("window `{}`: {e}", self.window)))
    }
}

/// Expands `${VAR}`; anything else is refused.
fn resolve_credential(raw: &str, role: AgentRole) -> Result<String, CliError> {
    let name = raw
        .strip_prefix("${")
        .and_then(|r| r.strip_suffix('}'))
        .filter(|n| !n.is_empty())
        .ok_or_else(|| {
            CliError::Config(format!(
                "agents.{}.api_key must be an environment reference like \"${{OPENAI_API_KEY}}\"",
                role.key()
            ))
        })?;
    std::env::var(name).map_err(|_| CliError::Config(format!("agents.{}.api_key: ${name} is not set", role.key())))
}

/// A validated configuration ready to run.
#[derive(Debug, Clone)]
pub struct Settings {
    pub run: RunConfig,
    pub pipeline: PipelineConfig,
    pub rules: MockRules,
    pub window: Duration,
    /// Embedded in every artifact.
    pub hash: String,
}

impl Settings {
    pub fn resolve(run: RunConfig) -> Result<Self, CliError> {
        let window = run.window()?;
        if window.is_zero() {
            return Err(CliError::Config("window must be positive".into()));
        }
        if !(0.0..1.0).contains(&run.tau) {
            return Err(CliError::Config(format!("tau {} outside [0, 1)", run.tau)));
        }
        if run.workers == 0 {
            return Err(CliError::Config("workers must be at least 1".into()));
        }
        let prompts = match &run.paths.prompts_dir {
            Some(dir) => PromptSet::load_dir(dir).map_err(|e| CliError::Config(format!("{}: {e}", dir.display())))?,
            None => PromptSet::bundled().clone(),
        };
        let (rules, rules_text) = match &run.paths.mock_rules {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                let rules = MockRules::from_toml(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                (rules, Some(text))
            }
            None => (MockRules::bundled().clone(), None),
        };
        let mut agents = BTreeMap::new();
        for role in AgentRole::ALL {
            let o = run.agents.get(&role).cloned().unwrap_or_default();
            let mut a = AgentConfig::default_for(role, o.backend.unwrap_or(run.backend));
            a.prompt_template = prompts.template(role).to_string();
            if let Some(m) = o.model {
                a.model_name = m;
            }
            if let Some(t) = o.temperature {
                a.temperature = t;
            }
            if let Some(r) = o.max_retries {
                a.max_retries = r;
            }
            if let Some(s) = o.timeout_secs {
                a.timeout = Duration::try_from_secs_f64(s)
                    .map_err(|e| CliError::Config(format!("agents.{}.timeout_secs: {e}", role.key())))?;
            }
            let ep = &mut a.endpoint;
            if let Some(u) = o.url {
                ep.url = u;
            }
            if let Some(v) = o.api_key_env {
                ep.api_key_env = v;
            }
            if o.requests_per_minute.is_some() {
                ep.requests_per_minute = o.requests_per_minute;
            }
            if let Some(b) = o.backoff_base_ms {
                ep.backoff_base_ms = b;
            }
            if let Some(b) = o.backoff_max_ms {
                ep.backoff_max_ms = b;
            }
            if let Some(raw) = &o.api_key {
                // Mock roles never send requests, so an unset variable is harmless.
                if a.backend == Backend::RemoteChat {
                    ep.api_key = Some(resolve_credential(raw, role)?);
                }
            }
            agents.insert(role, a);
        }
        let pipeline = PipelineConfig {
            seed: run.seed,
            sample_size: run.sample_size,
            uncertain_threshold: run.uncertain_threshold,
            max_subgroups: run.max_subgroups,
            workers: run.workers,
            deterministic: run.deterministic,
            review_mode: run.review_mode,
            agents,
        };
        pipeline.validate().map_err(|e| CliError::Config(e.to_string()))?;

        #[derive(Serialize)]
        struct HashView {
            pipeline: String,
            mock_rules: Option<String>,
            tau: f64,
            window_secs: f64,
            missing_cohesion: MissingCohesion,
        }
        let hash = fingerprint(&HashView {
            pipeline: pipeline.fingerprint(),
            mock_rules: rules_text.as_ref().map(fingerprint),
            tau: run.tau,
            window_secs: window.as_secs_f64(),
            missing_cohesion: run.missing_cohesion,
        });
        Ok(Settings {
            run,
            pipeline,
            rules,
            window,
            hash,
        })
    }

    pub fn system(&self) -> Result<AgentSystem, CliError> {
        let mut system = AgentSystem::new(self.pipeline.clone())?.with_mock_rules(self.rules.clone());
        if let Some(p) = &self.run.paths.checkpoint {
            system = system.with_checkpoint(p);
        }
        Ok(system)
    }

    /// Fails when an input artifact was produced under another configuration.
    pub fn check_hash(&self, artifact: &Path, found: Option<&str>) -> Result<(), CliError> {
        match found {
            Some(h) if h != self.hash => Err(CliError::HashMismatch {
                artifact: artifact.display().to_string(),
                expected: self.hash.clone(),
                found: h.to_string(),
            }),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve_to_an_all_mock_pipeline() {
        let s = Settings::resolve(RunConfig::default()).unwrap();
        assert!(AgentRole::ALL.iter().all(|&r| s.pipeline.agent(r).backend == Backend::Mock));
        assert_eq!(s.window, Duration::from_secs(86_400));
        assert_eq!(s.hash.len(), 64);
    }

    #[test]
    fn flags_override_file_values() {
        let mut run = RunConfig::from_toml("seed = 3\ntau = 0.2\n[paths]\ncheckpoint = \"a.json\"\n").unwrap();
        run.apply(&Overrides {
            seed: Some(9),
            checkpoint: Some("b.json".into()),
            ..Default::default()
        });
        assert_eq!((run.seed, run.tau), (9, 0.2));
        assert_eq!(run.paths.checkpoint, Some(PathBuf::from("b.json")));
    }

    #[test]
    fn hash_ignores_workers_and_paths_but_not_seed() {
        let base = Settings::resolve(RunConfig::default()).unwrap().hash;
        let mut run = RunConfig {
            workers: 4,
            ..Default::default()
        };
        run.paths.output = Some("elsewhere".into());
        assert_eq!(Settings::resolve(run).unwrap().hash, base);
        let run = RunConfig {
            seed: 1,
            ..Default::default()
        };
        assert_ne!(Settings::resolve(run).unwrap().hash, base);
    }

    #[test]
    fn unknown_keys_and_literal_keys_are_rejected() {
        assert!(RunConfig::from_toml("sede = 1").is_err());
        let run = RunConfig::from_toml(
            "[agents.sentiment_expert]\nbackend = \"remote_chat\"\napi_key = \"sk-literal\"\n",
        )
        .unwrap();
        let err = Settings::resolve(run).unwrap_err().to_string();
        assert!(err.contains("environment reference"), "{err}");
    }

    #[test]
    fn credentials_come_from_the_environment_and_stay_out_of_the_hash() {
        std::env::set_var("POLARSCOPE_TEST_KEY_A", "secret-a");
        std::env::set_var("POLARSCOPE_TEST_KEY_B", "secret-b");
        let with = |var: &str| {
            let text = format!("[agents.sentiment_expert]\nbackend = \"remote_chat\"\napi_key = \"${{{var}}}\"\n");
            Settings::resolve(RunConfig::from_toml(&text).unwrap()).unwrap()
        };
        let a = with("POLARSCOPE_TEST_KEY_A");
        let b = with("POLARSCOPE_TEST_KEY_B");
        assert_eq!(a.pipeline.agent(AgentRole::SentimentExpert).endpoint.api_key.as_deref(), Some("secret-a"));
        assert_eq!(a.hash, b.hash);
        let run = RunConfig::from_toml(
            "[agents.sentiment_expert]\nbackend = \"remote_chat\"\napi_key = \"${POLARSCOPE_TEST_UNSET}\"\n",
        )
        .unwrap();
        assert!(Settings::resolve(run).is_err());
    }

    #[test]
    fn bad_window_and_tau() {
        for text in ["window = \"soon\"", "window = \"0s\"", "tau = 1.0", "workers = 0"] {
            assert!(Settings::resolve(RunConfig::from_toml(text).unwrap()).is_err(), "{text}");
        }
    }
}

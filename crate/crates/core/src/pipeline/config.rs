use std::path::PathBuf;
use std::str::FromStr;

use crate::corpus::SchemaMode;
use crate::remote::MAX_BATCH;

use super::PipelineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScorerKind {
    #[default]
    Baseline,
    Remote,
}

impl FromStr for ScorerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(ScorerKind::Baseline),
            "remote" => Ok(ScorerKind::Remote),
            other => Err(format!("unknown scorer `{other}` (expected baseline or remote)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub corpus_path: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub scorer: ScorerKind,
    pub remote_url: Option<String>,
    pub workers: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub regression_spec_path: Option<PathBuf>,
    pub schema_mode: SchemaMode,
    pub force: bool,
}

pub const DEFAULT_BATCH_SIZE: usize = 64;

/// Partially specified configuration. Values come from a config file and
/// are then overridden field by field (command-line flags win).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigBuilder {
    pub corpus_path: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub scorer: Option<ScorerKind>,
    pub remote_url: Option<String>,
    pub workers: Option<usize>,
    pub batch_size: Option<usize>,
    pub seed: Option<u64>,
    pub regression_spec_path: Option<PathBuf>,
    pub schema_mode: Option<SchemaMode>,
    pub force: bool,
}

impl ConfigBuilder {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn from_config_text(text: &str) -> Result<Self, PipelineError> {
        let mut b = ConfigBuilder::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| PipelineError::Config(format!("config line {}: {msg}", i + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| bad("expected `key = value`".into()))?;
            let (key, value) = (key.trim(), value.trim());
            let num = |what: &str| value.parse::<u64>().map_err(|_| bad(format!("{what} must be an integer")));
            match key {
                "corpus_path" | "corpus" => b.corpus_path = Some(value.into()),
                "output_dir" | "out" => b.output_dir = Some(value.into()),
                "scorer" => b.scorer = Some(value.parse().map_err(bad)?),
                "remote_url" => b.remote_url = Some(value.into()),
                "workers" => b.workers = Some(num("workers")? as usize),
                "batch_size" => b.batch_size = Some(num("batch_size")? as usize),
                "seed" => b.seed = Some(num("seed")?),
                "regression_spec_path" | "regression_spec" => b.regression_spec_path = Some(value.into()),
                "schema_mode" => b.schema_mode = Some(value.parse().map_err(bad)?),
                _ => return Err(bad(format!("unknown key `{key}`"))),
            }
        }
        Ok(b)
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overlay(mut self, other: ConfigBuilder) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $(if other.$f.is_some() { self.$f = other.$f; })* };
        }
        take!(
            corpus_path,
            output_dir,
            scorer,
            remote_url,
            workers,
            batch_size,
            seed,
            regression_spec_path,
            schema_mode
        );
        self.force |= other.force;
        self
    }

    pub fn build(self) -> Result<PipelineConfig, PipelineError> {
        let cfg = PipelineConfig {
            corpus_path: self.corpus_path,
            output_dir: self.output_dir.ok_or_else(|| PipelineError::Config("output_dir is required".into()))?,
            scorer: self.scorer.unwrap_or_default(),
            remote_url: self.remote_url,
            workers: self.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
            batch_size: self.batch_size.unwrap_or(DEFAULT_BATCH_SIZE),
            seed: self.seed.unwrap_or(0),
            regression_spec_path: self.regression_spec_path,
            schema_mode: self.schema_mode.unwrap_or_default(),
            force: self.force,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let err = |m: &str| Err(PipelineError::Config(m.into()));
        if self.workers == 0 {
            return err("workers must be at least 1");
        }
        if !(1..=MAX_BATCH).contains(&self.batch_size) {
            return Err(PipelineError::Config(format!("batch_size must be in [1, {MAX_BATCH}]")));
        }
        match (self.scorer, &self.remote_url) {
            (ScorerKind::Remote, None) => err("scorer = remote requires remote_url"),
            (ScorerKind::Baseline, Some(_)) => err("remote_url is only used with scorer = remote"),
            _ => Ok(()),
        }
    }
}

//! Resumable pipeline stages over an output directory.
//!
//! Each stage reads its inputs, writes its outputs atomically and records a
//! manifest under `manifests/<stage>.json` holding a digest of everything
//! that determines the output. Re-running a stage whose digest matches the
//! stored manifest is a no-op unless `force` is set.

mod config;
mod files;
mod report;
mod stages;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::claims::{BaselineDiscourseClassifier, DiscourseClassifier};
use crate::corpus::CorpusError;
use crate::extract::{BackgroundClassifier, BaselineBackgroundClassifier};
use crate::fidelity::{BaselineScorer, Scorer, ScorerId};
use crate::remote::{RemoteClient, RemoteOptions, TransportError};

pub use config::{ConfigBuilder, PipelineConfig, ScorerKind, DEFAULT_BATCH_SIZE};
pub use files::{read_jsonl, to_jsonl, write_atomic, InputDigest, OutputLock, LOCK_FILE};
pub use report::{fidelity_histogram, histogram_edge, histogram_tsv, HISTOGRAM_BINS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Extract,
    Claims,
    Pairs,
    Regress,
    Telephone,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 6] =
        [Stage::Extract, Stage::Claims, Stage::Pairs, Stage::Regress, Stage::Telephone, Stage::Report];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Extract => "extract",
            Stage::Claims => "claims",
            Stage::Pairs => "pairs",
            Stage::Regress => "regress",
            Stage::Telephone => "telephone",
            Stage::Report => "report",
        }
    }

    /// Files (relative to the output directory) this stage writes.
    pub fn outputs(self) -> &'static [&'static str] {
        match self {
            Stage::Extract => &[files::CITATIONS],
            Stage::Claims => &[files::CLAIMS],
            Stage::Pairs => &[files::PAIRS],
            Stage::Regress => &[files::FEATURES, files::COEFFICIENTS, files::BINS, files::FIT],
            Stage::Telephone => &[files::MATCHED, files::EFFECTS],
            Stage::Report => &[files::HISTOGRAM],
        }
    }

    /// Output files of earlier stages this stage reads, with their producer.
    pub fn dependencies(self) -> &'static [(&'static str, Stage)] {
        match self {
            Stage::Extract | Stage::Claims => &[],
            Stage::Pairs => &[(files::CITATIONS, Stage::Extract), (files::CLAIMS, Stage::Claims)],
            Stage::Regress => &[(files::CITATIONS, Stage::Extract), (files::PAIRS, Stage::Pairs)],
            Stage::Telephone | Stage::Report => &[(files::PAIRS, Stage::Pairs)],
        }
    }

    fn needs_corpus(self) -> bool {
        matches!(self, Stage::Extract | Stage::Claims | Stage::Regress | Stage::Telephone)
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL.into_iter().find(|st| st.name() == s).ok_or_else(|| format!("unknown stage `{s}`"))
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("stage `{stage}` needs {missing}; run `{run_first}` first")]
    Dependency { stage: Stage, missing: String, run_first: Stage },
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}, line {line}: {message}")]
    Format { path: PathBuf, line: usize, message: String },
    #[error("output directory is locked by another run ({0}); remove the file if no run is active")]
    Locked(PathBuf),
    #[error("counter conservation violated in stage `{stage}`: {detail}")]
    Conservation { stage: Stage, detail: String },
    #[error("worker pool: {0}")]
    Pool(String),
}

/// Record of one completed stage run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub stage: String,
    pub input_digest: String,
    pub record_counts: BTreeMap<String, u64>,
    pub scorer: ScorerId,
    pub started: String,
    pub finished: String,
}

#[derive(Debug, Clone)]
pub struct StageOutcome {
    pub manifest: RunManifest,
    /// True when the stored outputs were already up to date.
    pub reused: bool,
}

/// Scorer and classifiers for one run. The remote client is connected (and
/// health-checked) only by stages that use it.
pub(crate) enum Backend {
    Baseline,
    Remote(Arc<RemoteClient>),
}

impl Backend {
    fn connect(cfg: &PipelineConfig) -> Result<Self, PipelineError> {
        match (cfg.scorer, &cfg.remote_url) {
            (ScorerKind::Remote, Some(url)) => {
                let opts = RemoteOptions { batch_size: cfg.batch_size, ..RemoteOptions::default() };
                Ok(Backend::Remote(Arc::new(RemoteClient::connect(url, opts)?)))
            }
            (ScorerKind::Remote, None) => Err(PipelineError::Config("scorer = remote requires remote_url".into())),
            (ScorerKind::Baseline, _) => Ok(Backend::Baseline),
        }
    }

    pub(crate) fn background(&self) -> &dyn BackgroundClassifier {
        match self {
            Backend::Baseline => &BaselineBackgroundClassifier,
            Backend::Remote(c) => c.as_ref(),
        }
    }

    pub(crate) fn discourse(&self) -> &dyn DiscourseClassifier {
        match self {
            Backend::Baseline => &BaselineDiscourseClassifier,
            Backend::Remote(c) => c.as_ref(),
        }
    }

    pub(crate) fn scorer(&self) -> &dyn Scorer {
        match self {
            Backend::Baseline => &BaselineScorer,
            Backend::Remote(c) => c.as_ref(),
        }
    }

    fn id_for(&self, stage: Stage) -> ScorerId {
        match (self, stage) {
            (Backend::Remote(c), _) => c.id(),
            (Backend::Baseline, Stage::Extract) => ScorerId::new("baseline-background-cues", "1"),
            (Backend::Baseline, Stage::Claims) => ScorerId::new("baseline-discourse-cues", "1"),
            (Backend::Baseline, _) => BaselineScorer.id(),
        }
    }
}

fn manifest_path(out: &Path, stage: Stage) -> PathBuf {
    out.join("manifests").join(format!("{}.json", stage.name()))
}

pub fn read_manifest(out: &Path, stage: Stage) -> Option<RunManifest> {
    let bytes = std::fs::read(manifest_path(out, stage)).ok()?;
    serde_json::from_slice(&bytes).ok()
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

fn check_conservation(stage: Stage, counts: &BTreeMap<String, u64>) -> Result<(), PipelineError> {
    let get = |k: &str| counts.get(k).copied().unwrap_or(0);
    let sum_prefix = |p: &str| counts.iter().filter(|(k, _)| k.starts_with(p)).map(|(_, v)| v).sum::<u64>();
    let mut eqs: Vec<(&str, u64, u64)> = Vec::new();
    match stage {
        Stage::Extract | Stage::Claims => {
            eqs.push((
                "records_in = papers_in + records_skipped",
                get("records_in"),
                get("papers_in") + get("records_skipped"),
            ));
            let (out, rej) =
                if stage == Stage::Extract { ("citations_out", "rejected_") } else { ("claims_out", "non_claim_") };
            eqs.push(("sentences_in = emitted + rejected", get("sentences_in"), get(out) + sum_prefix(rej)));
        }
        Stage::Pairs => eqs.push((
            "citations_in = pairs_out + skipped_no_claims",
            get("citations_in"),
            get("pairs_out") + get("skipped_no_claims"),
        )),
        Stage::Regress => {
            eqs.push((
                "pairs_in = rows_out + skipped_missing_paper",
                get("pairs_in"),
                get("rows_out") + get("skipped_missing_paper"),
            ));
            eqs.push((
                "rows_out = fit_observations + excluded_missing",
                get("rows_out"),
                get("fit_observations") + get("excluded_missing"),
            ));
        }
        Stage::Telephone => {
            eqs.push(("triples_found = matched + unmatched", get("triples_found"), get("matched") + get("unmatched")))
        }
        Stage::Report => eqs.push(("pairs_in = histogram_total", get("pairs_in"), get("histogram_total"))),
    }
    for (what, lhs, rhs) in eqs {
        if lhs != rhs {
            return Err(PipelineError::Conservation { stage, detail: format!("{what}: {lhs} != {rhs}") });
        }
    }
    Ok(())
}

/// Runs one stage. Holds the output-directory lock for the duration.
pub fn run_stage(stage: Stage, cfg: &PipelineConfig) -> Result<StageOutcome, PipelineError> {
    cfg.validate()?;
    let out = &cfg.output_dir;
    let _lock = OutputLock::acquire(out)?;

    if stage.needs_corpus() && cfg.corpus_path.is_none() {
        return Err(PipelineError::Config(format!("stage `{stage}` requires corpus_path")));
    }
    for (file, producer) in stage.dependencies() {
        if !out.join(file).is_file() {
            return Err(PipelineError::Dependency { stage, missing: file.to_string(), run_first: *producer });
        }
    }

    let backend = match stage {
        Stage::Extract | Stage::Claims | Stage::Pairs => Backend::connect(cfg)?,
        _ => Backend::Baseline,
    };
    let scorer_id = match stage {
        Stage::Extract | Stage::Claims | Stage::Pairs => backend.id_for(stage),
        _ => read_manifest(out, Stage::Pairs).map(|m| m.scorer).unwrap_or_else(|| backend.id_for(stage)),
    };
    let digest = stages::input_digest(stage, cfg, &scorer_id)?;

    if !cfg.force {
        if let Some(m) = read_manifest(out, stage) {
            if m.input_digest == digest && stage.outputs().iter().all(|f| out.join(f).is_file()) {
                tracing::info!(stage = stage.name(), "inputs unchanged; nothing to do");
                return Ok(StageOutcome { manifest: m, reused: true });
            }
        }
    }

    let started = now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| PipelineError::Pool(e.to_string()))?;
    let result = pool.install(|| stages::execute(stage, cfg, &backend))?;
    check_conservation(stage, &result.counts)?;
    for (name, bytes) in &result.files {
        write_atomic(&out.join(name), bytes)?;
    }
    if let Backend::Remote(c) = &backend {
        if c.protocol_warnings() > 0 {
            tracing::warn!(count = c.protocol_warnings(), "model service returned out-of-range values");
        }
    }
    let manifest = RunManifest {
        stage: stage.name().to_string(),
        input_digest: digest,
        record_counts: result.counts,
        scorer: scorer_id,
        started,
        finished: now(),
    };
    let mut json = serde_json::to_vec_pretty(&manifest).expect("manifest serialization is infallible");
    json.push(b'\n');
    write_atomic(&manifest_path(out, stage), &json)?;
    for (k, v) in &manifest.record_counts {
        tracing::info!(stage = stage.name(), counter = k.as_str(), value = v);
    }
    Ok(StageOutcome { manifest, reused: false })
}

/// Runs every stage in order.
pub fn run_all(cfg: &PipelineConfig) -> Result<Vec<StageOutcome>, PipelineError> {
    Stage::ALL.iter().map(|&s| run_stage(s, cfg)).collect()
}

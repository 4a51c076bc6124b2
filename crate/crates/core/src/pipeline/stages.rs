use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{
    bin_continuous, derive_features, encode_design_matrix, fit_ols, summarize, FeatureRow, RegressionSpec,
};
use crate::claims::{claims_from_labels, classify_discourse, ClaimSentence, DiscourseCategory};
use crate::corpus::{build_citation_graph, load_corpus_parallel, LoadedCorpus, Paper, PaperId};
use crate::extract::{extract_reporting_citations, CitationRecord, RejectReason};
use crate::fidelity::{build_pair_records, PairRecord, ScorerId};
use crate::telephone::{
    effects_tsv, estimate_effect, find_intermediary_triples, match_controls, stratify_by_intermediary_fidelity,
    MatchedPairRecord, PairIndex, PaperMeta,
};

use super::files::{self, io_err, read_jsonl, to_jsonl, InputDigest};
use super::report::{fidelity_histogram, histogram_tsv};
use super::{Backend, PipelineConfig, PipelineError, Stage};

pub(crate) struct StageResult {
    pub files: Vec<(String, Vec<u8>)>,
    pub counts: BTreeMap<String, u64>,
}

fn corpus_path(cfg: &PipelineConfig) -> &Path {
    cfg.corpus_path.as_deref().expect("checked by run_stage")
}

fn spec_text(cfg: &PipelineConfig) -> Result<Option<String>, PipelineError> {
    cfg.regression_spec_path.as_deref().map(|p| std::fs::read_to_string(p).map_err(io_err(p))).transpose()
}

pub(crate) fn input_digest(stage: Stage, cfg: &PipelineConfig, scorer: &ScorerId) -> Result<String, PipelineError> {
    let out = &cfg.output_dir;
    let mut d = InputDigest::default();
    d.part("stage", stage.name().as_bytes()).part("scorer", scorer.to_string().as_bytes());
    if matches!(stage, Stage::Extract | Stage::Claims | Stage::Regress | Stage::Telephone) {
        let mode = format!("{:?}", cfg.schema_mode);
        d.part("schema_mode", mode.as_bytes()).file("corpus", corpus_path(cfg))?;
    }
    for (f, _) in stage.dependencies() {
        d.file(f, &out.join(f))?;
    }
    match stage {
        Stage::Regress => {
            d.part("spec", spec_text(cfg)?.unwrap_or_default().as_bytes());
        }
        Stage::Report => {
            for f in [files::COEFFICIENTS, files::EFFECTS] {
                if out.join(f).is_file() {
                    d.file(f, &out.join(f))?;
                }
            }
        }
        _ => {}
    }
    Ok(d.finish())
}

pub(crate) fn execute(stage: Stage, cfg: &PipelineConfig, backend: &Backend) -> Result<StageResult, PipelineError> {
    match stage {
        Stage::Extract => extract(cfg, backend),
        Stage::Claims => claims(cfg, backend),
        Stage::Pairs => pairs(cfg, backend),
        Stage::Regress => regress(cfg),
        Stage::Telephone => telephone(cfg),
        Stage::Report => report(cfg),
    }
}

fn load(cfg: &PipelineConfig, counts: &mut BTreeMap<String, u64>) -> Result<LoadedCorpus, PipelineError> {
    let loaded = load_corpus_parallel(corpus_path(cfg), cfg.schema_mode)?;
    for e in loaded.skipped.iter().take(20) {
        tracing::warn!(error = %e, "skipped corpus record");
    }
    counts.insert("records_in".into(), (loaded.papers.len() + loaded.skipped.len()) as u64);
    counts.insert("papers_in".into(), loaded.papers.len() as u64);
    counts.insert("records_skipped".into(), loaded.skipped.len() as u64);
    counts.insert("sentences_in".into(), loaded.papers.iter().map(|p| p.body_sentences.len() as u64).sum());
    Ok(loaded)
}

fn extract(cfg: &PipelineConfig, backend: &Backend) -> Result<StageResult, PipelineError> {
    let mut counts = BTreeMap::new();
    let corpus = load(cfg, &mut counts)?;
    let classifier = backend.background();
    let per_paper: Vec<_> = corpus.papers.par_iter().map(|p| extract_reporting_citations(p, classifier)).collect();

    let mut records: Vec<CitationRecord> = Vec::new();
    let mut rejected: BTreeMap<RejectReason, u64> = RejectReason::ALL.iter().map(|r| (*r, 0)).collect();
    for ex in per_paper {
        let ex = ex?;
        records.extend(ex.instances.iter().map(CitationRecord::from));
        for (_, r) in ex.rejected {
            *rejected.get_mut(&r).unwrap() += 1;
        }
    }
    records.sort_by(|a, b| (&a.citing_paper_id, a.sentence_index).cmp(&(&b.citing_paper_id, b.sentence_index)));
    counts.insert("citations_out".into(), records.len() as u64);
    for (r, n) in rejected {
        counts.insert(format!("rejected_{}", r.as_str()), n);
    }
    Ok(StageResult { files: vec![(files::CITATIONS.into(), to_jsonl(&records))], counts })
}

fn claims(cfg: &PipelineConfig, backend: &Backend) -> Result<StageResult, PipelineError> {
    let mut counts = BTreeMap::new();
    let corpus = load(cfg, &mut counts)?;
    let classifier = backend.discourse();
    let per_paper: Vec<_> = corpus
        .papers
        .par_iter()
        .map(|p| {
            let texts: Vec<&str> = p.body_sentences.iter().map(String::as_str).collect();
            classify_discourse(&texts, classifier).map(|labels| (claims_from_labels(p, &labels), labels))
        })
        .collect();

    let mut claims: Vec<ClaimSentence> = Vec::new();
    let mut others: BTreeMap<&str, u64> =
        [DiscourseCategory::Methods, DiscourseCategory::Background, DiscourseCategory::Objective]
            .iter()
            .map(|c| (c.as_str(), 0))
            .collect();
    for r in per_paper {
        let (cl, labels) = r?;
        claims.extend(cl);
        for (cat, _) in labels.iter().filter(|(c, _)| !c.is_claim()) {
            *others.get_mut(cat.as_str()).unwrap() += 1;
        }
    }
    claims.sort_by(|a, b| (&a.paper_id, a.sentence_index).cmp(&(&b.paper_id, b.sentence_index)));
    counts.insert("claims_out".into(), claims.len() as u64);
    for (c, n) in others {
        counts.insert(format!("non_claim_{c}"), n);
    }
    Ok(StageResult { files: vec![(files::CLAIMS.into(), to_jsonl(&claims))], counts })
}

fn pairs(cfg: &PipelineConfig, backend: &Backend) -> Result<StageResult, PipelineError> {
    let out = &cfg.output_dir;
    let citations: Vec<CitationRecord> = read_jsonl(&out.join(files::CITATIONS))?;
    let claims: Vec<ClaimSentence> = read_jsonl(&out.join(files::CLAIMS))?;
    let mut by_paper: HashMap<PaperId, Vec<ClaimSentence>> = HashMap::new();
    for c in claims {
        by_paper.entry(c.paper_id.clone()).or_default().push(c);
    }
    let build = build_pair_records(&citations, &by_paper, backend.scorer())?;
    let counts = BTreeMap::from([
        ("citations_in".to_string(), citations.len() as u64),
        ("pairs_out".to_string(), build.records.len() as u64),
        ("skipped_no_claims".to_string(), build.skipped_no_claims as u64),
    ]);
    Ok(StageResult { files: vec![(files::PAIRS.into(), to_jsonl(&build.records))], counts })
}

#[derive(Serialize)]
struct FitSummary {
    n_observations: usize,
    n_columns: usize,
    residual_df: usize,
    r_squared: f64,
    adjusted_r_squared: f64,
    rss: f64,
    excluded_missing: usize,
}

fn regress(cfg: &PipelineConfig) -> Result<StageResult, PipelineError> {
    let out = &cfg.output_dir;
    let corpus = load_corpus_parallel(corpus_path(cfg), cfg.schema_mode)?;
    let papers: HashMap<&str, &Paper> = corpus.papers.iter().map(|p| (p.paper_id.as_str(), p)).collect();
    let citations: Vec<CitationRecord> = read_jsonl(&out.join(files::CITATIONS))?;
    let pairs: Vec<PairRecord> = read_jsonl(&out.join(files::PAIRS))?;
    let spec = match spec_text(cfg)? {
        Some(t) => RegressionSpec::parse(&t)?,
        None => RegressionSpec::main(),
    };

    let mut frequency: HashMap<(&str, &str), u32> = HashMap::new();
    for c in &citations {
        *frequency.entry((c.citing_paper_id.as_str(), c.cited_paper_id.as_str())).or_default() += 1;
    }
    let rows: Vec<Option<FeatureRow>> = pairs
        .par_iter()
        .map(|r| {
            let citing = papers.get(r.citing_paper_id.as_str())?;
            let cited = papers.get(r.cited_paper_id.as_str())?;
            let f = frequency.get(&(r.citing_paper_id.as_str(), r.cited_paper_id.as_str())).copied().unwrap_or(1);
            Some(derive_features(r, citing, cited, f))
        })
        .collect();
    let skipped = rows.iter().filter(|r| r.is_none()).count();
    let rows: Vec<FeatureRow> = rows.into_iter().flatten().collect();

    let encoded = encode_design_matrix(&rows, &spec)?;
    let fit = fit_ols(&encoded.matrix)?;

    let mut bins = String::from("variable\tbin\tlo\thi\tcount\tmean_fidelity\n");
    for (&var, &n) in &spec.bins {
        match bin_continuous(&rows, var, n) {
            Ok(bs) => {
                for b in bs {
                    let mean = b.mean_fidelity.map_or("NA".to_string(), |m| format!("{m:.6}"));
                    writeln!(bins, "{var}\t{}\t{:.6}\t{:.6}\t{}\t{mean}", b.label, b.lo, b.hi, b.count).unwrap();
                }
            }
            Err(e) => tracing::warn!(variable = var.name(), error = %e, "no bins for variable"),
        }
    }
    let summary = FitSummary {
        n_observations: fit.n_observations,
        n_columns: encoded.matrix.n_cols(),
        residual_df: fit.residual_df,
        r_squared: fit.r_squared,
        adjusted_r_squared: fit.adjusted_r_squared,
        rss: fit.rss,
        excluded_missing: encoded.excluded_missing,
    };
    let mut fit_json = serde_json::to_vec_pretty(&summary).expect("summary serialization is infallible");
    fit_json.push(b'\n');

    let counts = BTreeMap::from([
        ("pairs_in".to_string(), pairs.len() as u64),
        ("rows_out".to_string(), rows.len() as u64),
        ("skipped_missing_paper".to_string(), skipped as u64),
        ("fit_observations".to_string(), fit.n_observations as u64),
        ("excluded_missing".to_string(), encoded.excluded_missing as u64),
    ]);
    Ok(StageResult {
        files: vec![
            (files::FEATURES.into(), to_jsonl(&rows)),
            (files::COEFFICIENTS.into(), summarize(&fit).into_bytes()),
            (files::BINS.into(), bins.into_bytes()),
            (files::FIT.into(), fit_json),
        ],
        counts,
    })
}

fn telephone(cfg: &PipelineConfig) -> Result<StageResult, PipelineError> {
    let out = &cfg.output_dir;
    let corpus = load_corpus_parallel(corpus_path(cfg), cfg.schema_mode)?;
    let pairs: Vec<PairRecord> = read_jsonl(&out.join(files::PAIRS))?;
    let graph = build_citation_graph(&corpus.papers);
    let meta: HashMap<PaperId, PaperMeta> = corpus
        .papers
        .iter()
        .map(|p| (p.paper_id.clone(), PaperMeta { year: p.year, field: p.field.clone() }))
        .collect();
    let index = PairIndex::new(&pairs);
    let search = find_intermediary_triples(&graph, &index);
    let matching = match_controls(&search.triples, &index, &graph, &meta);
    let overall = estimate_effect(&matching.pairs).ok();
    let strata = stratify_by_intermediary_fidelity(&matching.pairs);
    let records: Vec<MatchedPairRecord> = matching.pairs.iter().map(MatchedPairRecord::from).collect();

    let counts = BTreeMap::from([
        ("pairs_in".to_string(), pairs.len() as u64),
        ("triples_found".to_string(), search.triples.len() as u64),
        ("triples_skipped_unscored".to_string(), search.skipped_unscored as u64),
        ("matched".to_string(), matching.pairs.len() as u64),
        ("unmatched".to_string(), matching.unmatched as u64),
    ]);
    Ok(StageResult {
        files: vec![
            (files::MATCHED.into(), to_jsonl(&records)),
            (files::EFFECTS.into(), effects_tsv(overall.as_ref(), &strata).into_bytes()),
        ],
        counts,
    })
}

fn report(cfg: &PipelineConfig) -> Result<StageResult, PipelineError> {
    let out = &cfg.output_dir;
    let pairs: Vec<PairRecord> = read_jsonl(&out.join(files::PAIRS))?;
    let scores: Vec<f64> = pairs.iter().map(|p| p.fidelity.value()).collect();
    let hist = fidelity_histogram(&scores);
    let mut out_files = vec![(files::HISTOGRAM.to_string(), histogram_tsv(&hist).into_bytes())];
    for f in [files::COEFFICIENTS, files::EFFECTS] {
        let p = out.join(f);
        if p.is_file() {
            out_files.push((format!("report/{f}"), std::fs::read(&p).map_err(io_err(&p))?));
        }
    }
    let counts = BTreeMap::from([
        ("pairs_in".to_string(), pairs.len() as u64),
        ("histogram_total".to_string(), hist.iter().sum::<usize>() as u64),
    ]);
    Ok(StageResult { files: out_files, counts })
}

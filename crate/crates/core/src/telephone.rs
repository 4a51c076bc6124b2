//! Intermediary-citation quasi-experiment.
//!
//! Paper C cites an original A and also an intermediary B that itself cites
//! A. Each such triple is matched to a control D that cites A directly (same
//! year, field and matched claim of A, no path through any paper citing A),
//! and the fidelity of C→A is compared with D→A.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CitationGraph, PaperId};
use crate::fidelity::PairRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stratum {
    Low,
    Medium,
    High,
}

impl Stratum {
    pub const ALL: [Stratum; 3] = [Stratum::Low, Stratum::Medium, Stratum::High];

    /// Above 4 is high, 3 through 4 inclusive is medium, below 3 is low.
    pub fn of(fidelity: f64) -> Self {
        if fidelity > 4.0 {
            Stratum::High
        } else if fidelity >= 3.0 {
            Stratum::Medium
        } else {
            Stratum::Low
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stratum::Low => "low",
            Stratum::Medium => "medium",
            Stratum::High => "high",
        }
    }
}

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Scored pairs keyed by (citing, cited). When a citing paper reports the
/// same cited paper in several sentences, the earliest sentence is kept.
#[derive(Debug, Clone, Default)]
pub struct PairIndex {
    by_pair: HashMap<(PaperId, PaperId), PairRecord>,
}

impl PairIndex {
    pub fn new(records: &[PairRecord]) -> Self {
        let mut by_pair: HashMap<(PaperId, PaperId), PairRecord> = HashMap::new();
        for r in records {
            let key = (r.citing_paper_id.clone(), r.cited_paper_id.clone());
            match by_pair.get(&key) {
                Some(existing) if existing.citing_sentence_index <= r.citing_sentence_index => {}
                _ => {
                    by_pair.insert(key, r.clone());
                }
            }
        }
        PairIndex { by_pair }
    }

    pub fn get(&self, citing: &str, cited: &str) -> Option<&PairRecord> {
        self.by_pair.get(&(citing.to_string(), cited.to_string()))
    }

    pub fn len(&self) -> usize {
        self.by_pair.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_pair.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TelephoneTriple {
    pub original_a: PaperId,
    pub intermediary_b: PaperId,
    pub treated_c: PaperId,
    pub c_to_a: PairRecord,
    pub b_to_a: PairRecord,
    pub b_fidelity_stratum: Stratum,
}

#[derive(Debug, Clone, Default)]
pub struct TripleSearch {
    /// Sorted by (A, B, C).
    pub triples: Vec<TelephoneTriple>,
    /// Structural triples where C→A or B→A has no scored record.
    pub skipped_unscored: usize,
}

/// Every (A, B, C) with edges B→A, C→A and C→B, in sorted order. Parallel
/// over originals A.
pub fn find_intermediary_triples(graph: &CitationGraph, index: &PairIndex) -> TripleSearch {
    let originals: Vec<&PaperId> = graph.reverse.keys().collect();
    let per_a: Vec<TripleSearch> = originals
        .par_iter()
        .map(|a| {
            let mut out = TripleSearch::default();
            let citers = graph.cited_by(a);
            for b in citers {
                for c in citers {
                    if b == c || !graph.cites(c, b) {
                        continue;
                    }
                    match (index.get(c, a), index.get(b, a)) {
                        (Some(ca), Some(ba)) => out.triples.push(TelephoneTriple {
                            original_a: (*a).clone(),
                            intermediary_b: b.clone(),
                            treated_c: c.clone(),
                            c_to_a: ca.clone(),
                            b_to_a: ba.clone(),
                            b_fidelity_stratum: Stratum::of(ba.fidelity.value()),
                        }),
                        _ => out.skipped_unscored += 1,
                    }
                }
            }
            out
        })
        .collect();
    let mut out = TripleSearch::default();
    for s in per_a {
        out.triples.extend(s.triples);
        out.skipped_unscored += s.skipped_unscored;
    }
    out
}

/// Matching attributes of a paper.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaperMeta {
    pub year: i32,
    pub field: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub triple: TelephoneTriple,
    pub control_d: PaperId,
    pub d_to_a: PairRecord,
}

#[derive(Debug, Clone, Default)]
pub struct Matching {
    pub pairs: Vec<MatchedPair>,
    pub unmatched: usize,
}

/// Whether `d` is an admissible control for original `a`: it cites A with a
/// scored record and cites no paper that itself cites A.
pub fn is_pure_control(graph: &CitationGraph, a: &str, d: &str) -> bool {
    graph.cites(d, a) && !graph.cited_by(a).iter().any(|x| graph.cites(d, x))
}

/// 1:1 greedy exact matching. Triples are visited in (A, B, C) order and each
/// takes the first unused candidate D (sorted by id) with the same year,
/// field and matched claim as C. A control is used at most once per A.
pub fn match_controls(
    triples: &[TelephoneTriple],
    index: &PairIndex,
    graph: &CitationGraph,
    meta: &HashMap<PaperId, PaperMeta>,
) -> Matching {
    let mut groups: BTreeMap<&str, Vec<&TelephoneTriple>> = BTreeMap::new();
    for t in triples {
        groups.entry(t.original_a.as_str()).or_default().push(t);
    }
    let groups: Vec<(&str, Vec<&TelephoneTriple>)> = groups.into_iter().collect();
    let per_a: Vec<Matching> = groups
        .par_iter()
        .map(|(a, ts)| {
            let treated: BTreeSet<&str> = ts.iter().map(|t| t.treated_c.as_str()).collect();
            let candidates: Vec<(&str, &PairRecord, &PaperMeta)> = graph
                .cited_by(a)
                .iter()
                .filter(|d| !treated.contains(d.as_str()) && is_pure_control(graph, a, d))
                .filter_map(|d| Some((d.as_str(), index.get(d, a)?, meta.get(d)?)))
                .collect();
            let mut used = vec![false; candidates.len()];
            let mut out = Matching::default();
            for t in ts {
                let Some(cm) = meta.get(&t.treated_c) else {
                    out.unmatched += 1;
                    continue;
                };
                let hit = candidates.iter().enumerate().position(|(i, (_, rec, m))| {
                    !used[i]
                        && m.year == cm.year
                        && m.field == cm.field
                        && rec.matched_claim_index == t.c_to_a.matched_claim_index
                });
                match hit {
                    Some(i) => {
                        used[i] = true;
                        out.pairs.push(MatchedPair {
                            triple: (*t).clone(),
                            control_d: candidates[i].0.to_string(),
                            d_to_a: candidates[i].1.clone(),
                        });
                    }
                    None => out.unmatched += 1,
                }
            }
            out
        })
        .collect();
    let mut out = Matching::default();
    for m in per_a {
        out.pairs.extend(m.pairs);
        out.unmatched += m.unmatched;
    }
    out
}

#[derive(Debug, Error, PartialEq)]
pub enum TelephoneError {
    #[error("need at least 2 matched pairs, got {0}")]
    InsufficientData(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectEstimate {
    pub n_pairs: usize,
    pub mean_treatment: f64,
    pub mean_control: f64,
    pub difference: f64,
    /// Standard error of the paired difference, `sd(diff)/√n`.
    pub standard_error: f64,
}

/// Paired treatment-minus-control estimate from (treatment, control) values.
pub fn paired_estimate(values: &[(f64, f64)]) -> Result<EffectEstimate, TelephoneError> {
    let n = values.len();
    if n < 2 {
        return Err(TelephoneError::InsufficientData(n));
    }
    let nf = n as f64;
    let mean_treatment = values.iter().map(|v| v.0).sum::<f64>() / nf;
    let mean_control = values.iter().map(|v| v.1).sum::<f64>() / nf;
    let difference = mean_treatment - mean_control;
    let var = values.iter().map(|(t, c)| (t - c - difference).powi(2)).sum::<f64>() / (nf - 1.0);
    Ok(EffectEstimate { n_pairs: n, mean_treatment, mean_control, difference, standard_error: (var / nf).sqrt() })
}

pub fn estimate_effect(pairs: &[MatchedPair]) -> Result<EffectEstimate, TelephoneError> {
    let values: Vec<(f64, f64)> =
        pairs.iter().map(|p| (p.triple.c_to_a.fidelity.value(), p.d_to_a.fidelity.value())).collect();
    paired_estimate(&values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumSummary {
    pub stratum: Stratum,
    pub n: usize,
    /// Mean C→A fidelity; `None` for an empty stratum.
    pub mean_treatment: Option<f64>,
    /// `None` when the stratum has fewer than 2 pairs.
    pub estimate: Option<EffectEstimate>,
}

/// Per-stratum summaries ordered low, medium, high.
pub fn stratify_by_intermediary_fidelity(pairs: &[MatchedPair]) -> Vec<StratumSummary> {
    Stratum::ALL
        .iter()
        .map(|&s| {
            let group: Vec<MatchedPair> = pairs.iter().filter(|p| p.triple.b_fidelity_stratum == s).cloned().collect();
            let n = group.len();
            StratumSummary {
                stratum: s,
                n,
                mean_treatment: (n > 0)
                    .then(|| group.iter().map(|p| p.triple.c_to_a.fidelity.value()).sum::<f64>() / n as f64),
                estimate: estimate_effect(&group).ok(),
            }
        })
        .collect()
}

/// Flat line-file form of a matched pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedPairRecord {
    pub original_a: PaperId,
    pub intermediary_b: PaperId,
    pub treated_c: PaperId,
    pub control_d: PaperId,
    pub matched_claim_index: usize,
    pub treatment_fidelity: f64,
    pub control_fidelity: f64,
    pub intermediary_fidelity: f64,
    pub stratum: Stratum,
}

impl From<&MatchedPair> for MatchedPairRecord {
    fn from(p: &MatchedPair) -> Self {
        MatchedPairRecord {
            original_a: p.triple.original_a.clone(),
            intermediary_b: p.triple.intermediary_b.clone(),
            treated_c: p.triple.treated_c.clone(),
            control_d: p.control_d.clone(),
            matched_claim_index: p.d_to_a.matched_claim_index,
            treatment_fidelity: p.triple.c_to_a.fidelity.value(),
            control_fidelity: p.d_to_a.fidelity.value(),
            intermediary_fidelity: p.triple.b_to_a.fidelity.value(),
            stratum: p.triple.b_fidelity_stratum,
        }
    }
}

/// Effects table: an `overall` row then one row per stratum. Missing
/// estimates are written as `NA`.
pub fn effects_tsv(overall: Option<&EffectEstimate>, strata: &[StratumSummary]) -> String {
    let mut out = String::from("group\tn\tmean_treatment\tmean_control\tdifference\tse\n");
    let mut row = |name: &str, n: usize, e: Option<&EffectEstimate>| match e {
        Some(e) => writeln!(
            out,
            "{name}\t{n}\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
            e.mean_treatment, e.mean_control, e.difference, e.standard_error
        )
        .unwrap(),
        None => writeln!(out, "{name}\t{n}\tNA\tNA\tNA\tNA").unwrap(),
    };
    row("overall", overall.map_or(0, |e| e.n_pairs), overall);
    for s in strata {
        row(s.stratum.as_str(), s.n, s.estimate.as_ref());
    }
    out
}

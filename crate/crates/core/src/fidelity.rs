//! Sentence-pair fidelity scoring on the 1–5 information-change scale and
//! upper-bound matching of citing sentences against cited claims.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::claims::ClaimSentence;
use crate::corpus::PaperId;
use crate::extract::CitationRecord;
use crate::remote::TransportError;

/// A score in `[1, 5]`; 5 means the two sentences carry the same findings.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FidelityScore(f64);

impl FidelityScore {
    pub const MIN: f64 = 1.0;
    pub const MAX: f64 = 5.0;

    pub fn new(value: f64) -> Option<Self> {
        (Self::MIN..=Self::MAX).contains(&value).then_some(FidelityScore(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for FidelityScore {
    type Error = String;

    fn try_from(v: f64) -> Result<Self, Self::Error> {
        FidelityScore::new(v).ok_or_else(|| format!("fidelity {v} outside [1, 5]"))
    }
}

impl From<FidelityScore> for f64 {
    fn from(s: FidelityScore) -> f64 {
        s.0
    }
}

impl fmt::Display for FidelityScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ScorerId {
    pub name: String,
    pub version: String,
}

impl ScorerId {
    pub fn new(name: &str, version: &str) -> Self {
        ScorerId { name: name.to_string(), version: version.to_string() }
    }
}

impl fmt::Display for ScorerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.name, self.version)
    }
}

/// Anything that can score sentence pairs. Implementations are shared across
/// worker threads.
pub trait Scorer: Send + Sync {
    fn id(&self) -> ScorerId;

    fn score_batch(&self, pairs: &[(&str, &str)]) -> Result<Vec<FidelityScore>, TransportError>;

    fn score_pair(&self, a: &str, b: &str) -> Result<FidelityScore, TransportError> {
        let mut v = self.score_batch(&[(a, b)])?;
        v.pop().ok_or_else(|| TransportError::Protocol("empty score response".into()))
    }
}

pub fn score_pair(a: &str, b: &str, scorer: &dyn Scorer) -> Result<FidelityScore, TransportError> {
    scorer.score_pair(a, b)
}

pub fn score_batch(pairs: &[(&str, &str)], scorer: &dyn Scorer) -> Result<Vec<FidelityScore>, TransportError> {
    if pairs.is_empty() {
        return Ok(Vec::new());
    }
    let out = scorer.score_batch(pairs)?;
    if out.len() != pairs.len() {
        return Err(TransportError::Protocol(format!("scored {} of {} pairs", out.len(), pairs.len())));
    }
    Ok(out)
}

fn is_latin_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || (('\u{00c0}'..='\u{024f}').contains(&c) && c != '\u{00d7}' && c != '\u{00f7}')
}

/// Lowercased runs of Latin letters/digits, length-1 runs dropped.
pub fn baseline_tokens(s: &str) -> BTreeSet<String> {
    s.to_lowercase()
        .split(|c: char| !is_latin_word_char(c))
        .filter(|t| t.chars().count() > 1)
        .map(str::to_string)
        .collect()
}

/// Jaccard overlap of baseline token sets; `None` when both sets are empty.
pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> Option<f64> {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    (union > 0).then(|| inter as f64 / union as f64)
}

/// Deterministic token-overlap scorer: `1 + 4·J` on Jaccard overlap `J`.
#[derive(Debug, Clone, Copy, Default)]
pub struct BaselineScorer;

impl BaselineScorer {
    pub const NAME: &'static str = "baseline-jaccard";
    pub const VERSION: &'static str = "1";

    pub fn score(a: &str, b: &str) -> FidelityScore {
        let j = jaccard(&baseline_tokens(a), &baseline_tokens(b)).unwrap_or(1.0);
        FidelityScore(1.0 + 4.0 * j)
    }
}

impl Scorer for BaselineScorer {
    fn id(&self) -> ScorerId {
        ScorerId::new(Self::NAME, Self::VERSION)
    }

    fn score_batch(&self, pairs: &[(&str, &str)]) -> Result<Vec<FidelityScore>, TransportError> {
        Ok(pairs.iter().map(|(a, b)| Self::score(a, b)).collect())
    }
}

#[derive(Debug, Error)]
pub enum FidelityError {
    #[error("no candidate claims to match against")]
    NoCandidates,
    #[error(transparent)]
    Transport(#[from] TransportError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestMatch {
    /// `sentence_index` of the winning claim in the cited paper.
    pub claim_index: usize,
    pub score: FidelityScore,
}

/// Arg-max over already computed candidate scores; ties go to the smaller
/// sentence index.
pub fn arg_max(candidates: impl IntoIterator<Item = (usize, FidelityScore)>) -> Option<BestMatch> {
    let mut best: Option<BestMatch> = None;
    for (claim_index, score) in candidates {
        let better = match best {
            None => true,
            Some(b) => score > b.score || (score == b.score && claim_index < b.claim_index),
        };
        if better {
            best = Some(BestMatch { claim_index, score });
        }
    }
    best
}

/// Scores `citing` against every claim and keeps the best one.
pub fn best_match(citing: &str, claims: &[ClaimSentence], scorer: &dyn Scorer) -> Result<BestMatch, FidelityError> {
    if claims.is_empty() {
        return Err(FidelityError::NoCandidates);
    }
    let pairs: Vec<(&str, &str)> = claims.iter().map(|c| (citing, c.sentence_text.as_str())).collect();
    let scores = score_batch(&pairs, scorer)?;
    Ok(arg_max(claims.iter().map(|c| c.sentence_index).zip(scores)).expect("non-empty"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub citing_paper_id: PaperId,
    pub citing_sentence_index: usize,
    pub cited_paper_id: PaperId,
    pub matched_claim_index: usize,
    pub fidelity: FidelityScore,
    pub n_candidates: usize,
    pub scorer: ScorerId,
}

impl PairRecord {
    pub fn sort_key(&self) -> (&str, usize, &str) {
        (&self.citing_paper_id, self.citing_sentence_index, &self.cited_paper_id)
    }
}

#[derive(Debug, Clone, Default)]
pub struct PairBuild {
    pub records: Vec<PairRecord>,
    /// Citations whose cited paper has no claim sentences.
    pub skipped_no_claims: usize,
}

/// Instances scored per `score_batch` call.
const INSTANCES_PER_CHUNK: usize = 32;

/// One record per citation whose cited paper has at least one claim.
/// Parallel over chunks on the current rayon pool; output is sorted by
/// `(citing_paper_id, citing_sentence_index)`.
pub fn build_pair_records(
    citations: &[CitationRecord],
    claims_by_paper: &HashMap<PaperId, Vec<ClaimSentence>>,
    scorer: &dyn Scorer,
) -> Result<PairBuild, TransportError> {
    let id = scorer.id();
    let chunks: Vec<Result<PairBuild, TransportError>> = citations
        .par_chunks(INSTANCES_PER_CHUNK)
        .map(|chunk| {
            let mut build = PairBuild::default();
            let mut pairs: Vec<(&str, &str)> = Vec::new();
            let mut owners: Vec<(&CitationRecord, &[ClaimSentence])> = Vec::new();
            for c in chunk {
                match claims_by_paper.get(&c.cited_paper_id) {
                    Some(claims) if !claims.is_empty() => {
                        pairs.extend(claims.iter().map(|cl| (c.sentence_text.as_str(), cl.sentence_text.as_str())));
                        owners.push((c, claims));
                    }
                    _ => build.skipped_no_claims += 1,
                }
            }
            let scores = score_batch(&pairs, scorer)?;
            let mut offset = 0;
            for (c, claims) in owners {
                let slice = &scores[offset..offset + claims.len()];
                offset += claims.len();
                let best =
                    arg_max(claims.iter().map(|cl| cl.sentence_index).zip(slice.iter().copied())).expect("non-empty");
                build.records.push(PairRecord {
                    citing_paper_id: c.citing_paper_id.clone(),
                    citing_sentence_index: c.sentence_index,
                    cited_paper_id: c.cited_paper_id.clone(),
                    matched_claim_index: best.claim_index,
                    fidelity: best.score,
                    n_candidates: claims.len(),
                    scorer: id.clone(),
                });
            }
            Ok(build)
        })
        .collect();

    let mut out = PairBuild::default();
    for c in chunks {
        let c = c?;
        out.records.extend(c.records);
        out.skipped_no_claims += c.skipped_no_claims;
    }
    out.records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    Ok(out)
}

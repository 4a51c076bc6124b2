//! Discourse classification of cited-paper sentences and claim selection.

use serde::{Deserialize, Serialize};

use crate::corpus::{Paper, PaperId};
use crate::remote::TransportError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiscourseCategory {
    Methods,
    Background,
    Objective,
    Results,
    Conclusions,
}

impl DiscourseCategory {
    pub fn is_claim(self) -> bool {
        matches!(self, DiscourseCategory::Results | DiscourseCategory::Conclusions)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DiscourseCategory::Methods => "methods",
            DiscourseCategory::Background => "background",
            DiscourseCategory::Objective => "objective",
            DiscourseCategory::Results => "results",
            DiscourseCategory::Conclusions => "conclusions",
        }
    }
}

impl std::str::FromStr for DiscourseCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "methods" => Ok(DiscourseCategory::Methods),
            "background" => Ok(DiscourseCategory::Background),
            "objective" => Ok(DiscourseCategory::Objective),
            "results" => Ok(DiscourseCategory::Results),
            "conclusions" => Ok(DiscourseCategory::Conclusions),
            other => Err(format!("unknown discourse label `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimSentence {
    pub paper_id: PaperId,
    pub sentence_index: usize,
    pub sentence_text: String,
    pub category: DiscourseCategory,
    pub confidence: f64,
}

pub trait DiscourseClassifier: Send + Sync {
    fn classify(&self, sentences: &[&str]) -> Result<Vec<(DiscourseCategory, f64)>, TransportError>;
}

pub fn classify_discourse(
    sentences: &[&str],
    classifier: &dyn DiscourseClassifier,
) -> Result<Vec<(DiscourseCategory, f64)>, TransportError> {
    if sentences.is_empty() {
        return Ok(Vec::new());
    }
    let out = classifier.classify(sentences)?;
    if out.len() != sentences.len() {
        return Err(TransportError::Protocol(format!(
            "expected {} discourse labels, got {}",
            sentences.len(),
            out.len()
        )));
    }
    Ok(out)
}

// Checked in this order; first hit wins.
const CUES: &[(DiscourseCategory, &[&str])] = &[
    (DiscourseCategory::Conclusions, &["in conclusion", "we conclude", "these findings suggest", "overall"]),
    (DiscourseCategory::Results, &["we find", "results show", "was associated with", "significantly"]),
    (DiscourseCategory::Methods, &["we used", "recruited", "was measured"]),
    (DiscourseCategory::Objective, &["we aim", "the goal of"]),
];

/// Confidence reported when no cue matched and the sentence defaults to
/// background.
pub const DEFAULT_BACKGROUND_CONFIDENCE: f64 = 0.5;

/// Cue-lexicon discourse classifier.
#[derive(Debug, Clone, Copy, Default)]
pub struct BaselineDiscourseClassifier;

fn contains_phrase(haystack: &str, phrase: &str) -> bool {
    let bytes = haystack.as_bytes();
    haystack.match_indices(phrase).any(|(i, _)| {
        let before = i == 0 || !bytes[i - 1].is_ascii_alphanumeric();
        let j = i + phrase.len();
        let after = j == bytes.len() || !bytes[j].is_ascii_alphanumeric();
        before && after
    })
}

impl BaselineDiscourseClassifier {
    pub fn label(sentence: &str) -> (DiscourseCategory, f64) {
        let lower = sentence.to_lowercase();
        for (cat, cues) in CUES {
            if cues.iter().any(|c| contains_phrase(&lower, c)) {
                return (*cat, 1.0);
            }
        }
        (DiscourseCategory::Background, DEFAULT_BACKGROUND_CONFIDENCE)
    }
}

impl DiscourseClassifier for BaselineDiscourseClassifier {
    fn classify(&self, sentences: &[&str]) -> Result<Vec<(DiscourseCategory, f64)>, TransportError> {
        Ok(sentences.iter().map(|s| Self::label(s)).collect())
    }
}

/// Sentences labelled results or conclusions, in document order.
pub fn select_claims(
    paper: &Paper,
    classifier: &dyn DiscourseClassifier,
) -> Result<Vec<ClaimSentence>, TransportError> {
    let texts: Vec<&str> = paper.body_sentences.iter().map(String::as_str).collect();
    let labels = classify_discourse(&texts, classifier)?;
    Ok(claims_from_labels(paper, &labels))
}

/// Claim sentences given one label per body sentence.
pub fn claims_from_labels(paper: &Paper, labels: &[(DiscourseCategory, f64)]) -> Vec<ClaimSentence> {
    labels
        .iter()
        .enumerate()
        .filter(|(_, (cat, _))| cat.is_claim())
        .map(|(i, &(category, confidence))| ClaimSentence {
            paper_id: paper.paper_id.clone(),
            sentence_index: i,
            sentence_text: paper.body_sentences[i].clone(),
            category,
            confidence,
        })
        .collect()
}

//! Reporting-citation extraction: marker parsing, the single-source terminal
//! rule filter, and the background-citation gate.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::{Paper, PaperId};
use crate::remote::TransportError;

/// Confidence at or above which a sentence counts as a background citation.
pub const BACKGROUND_THRESHOLD: f64 = 0.5;

/// Numeric ranges wider than this are treated as unparseable.
const MAX_RANGE_SPAN: u32 = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarkerStyle {
    NumericBracket,
    AuthorYearParen,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CitationMarker {
    /// Character (not byte) offsets, end exclusive.
    pub span: (usize, usize),
    pub style: MarkerStyle,
    pub keys: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CitationInstance {
    pub citing_paper_id: PaperId,
    pub sentence_index: usize,
    pub sentence_text: String,
    pub cited_paper_id: PaperId,
    pub marker: CitationMarker,
    pub is_background: bool,
    pub background_confidence: f64,
}

/// Why a sentence did not become a reporting citation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RejectReason {
    NoMarker,
    MultipleMarkers,
    NotTerminal,
    MultipleKeys,
    /// Marker key has no bibliography entry.
    UnknownKey,
    /// Bibliography entry exists but does not resolve to a corpus paper.
    UnresolvedReference,
    NotBackground,
}

impl RejectReason {
    pub const ALL: [RejectReason; 7] = [
        RejectReason::NoMarker,
        RejectReason::MultipleMarkers,
        RejectReason::NotTerminal,
        RejectReason::MultipleKeys,
        RejectReason::UnknownKey,
        RejectReason::UnresolvedReference,
        RejectReason::NotBackground,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::NoMarker => "no_marker",
            RejectReason::MultipleMarkers => "multiple_markers",
            RejectReason::NotTerminal => "not_terminal",
            RejectReason::MultipleKeys => "multiple_keys",
            RejectReason::UnknownKey => "unknown_key",
            RejectReason::UnresolvedReference => "unresolved_reference",
            RejectReason::NotBackground => "not_background",
        }
    }
}

fn numeric_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\[\s*(\d+(?:\s*[-–,]\s*\d+)*)\s*\]").unwrap())
}

fn paren_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\(([^()]*)\)").unwrap())
}

fn author_year_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"^(?:e\.g\.,?\s+|see\s+)?(\p{Lu}[\p{L}'\-]+)(?:\s+(?:and|&)\s+\p{Lu}[\p{L}'\-]+)?(?:\s+et\s+al\.?)?,?\s+((?:1[5-9]|20)\d{2})[a-z]?$",
        )
        .unwrap()
    })
}

fn expand_numeric(body: &str) -> Option<Vec<String>> {
    let mut keys = Vec::new();
    for part in body.split(',') {
        let part = part.trim();
        if let Some((a, b)) = part.split_once(['-', '\u{2013}']) {
            let a: u32 = a.trim().parse().ok()?;
            let b: u32 = b.trim().parse().ok()?;
            if b < a || b - a > MAX_RANGE_SPAN {
                return None;
            }
            keys.extend((a..=b).map(|k| k.to_string()));
        } else {
            keys.push(part.parse::<u32>().ok()?.to_string());
        }
    }
    Some(keys)
}

/// Normalised author-year key: first surname, a space, the year
/// (`"(Lee et al. 2020)"` gives `"Lee 2020"`).
pub fn author_year_key(surname: &str, year: &str) -> String {
    format!("{surname} {year}")
}

fn expand_author_year(body: &str) -> Option<Vec<String>> {
    let mut keys = Vec::new();
    for part in body.split(';') {
        let caps = author_year_re().captures(part.trim())?;
        keys.push(author_year_key(&caps[1], &caps[2]));
    }
    (!keys.is_empty()).then_some(keys)
}

/// Finds `[..]` and `(..)` citation markers, ordered by span start.
pub fn parse_markers(sentence: &str) -> Vec<CitationMarker> {
    let mut found: Vec<(usize, usize, MarkerStyle, Vec<String>)> = Vec::new();
    for m in numeric_re().captures_iter(sentence) {
        let whole = m.get(0).unwrap();
        if let Some(keys) = expand_numeric(&m[1]) {
            found.push((whole.start(), whole.end(), MarkerStyle::NumericBracket, keys));
        }
    }
    for m in paren_re().captures_iter(sentence) {
        let whole = m.get(0).unwrap();
        if let Some(keys) = expand_author_year(&m[1]) {
            found.push((whole.start(), whole.end(), MarkerStyle::AuthorYearParen, keys));
        }
    }
    found.sort_by_key(|f| f.0);

    // byte offsets to char offsets
    let mut markers = Vec::with_capacity(found.len());
    let mut last_end = 0;
    for (s, e, style, keys) in found {
        if s < last_end {
            continue;
        }
        last_end = e;
        let start = sentence[..s].chars().count();
        let end = start + sentence[s..e].chars().count();
        markers.push(CitationMarker { span: (start, end), style, keys });
    }
    markers
}

fn is_terminal_tail(c: char) -> bool {
    matches!(c, '.' | '!' | '?' | '"' | '\'' | '\u{201d}' | '\u{2019}' | '\u{bb}') || c.is_whitespace()
}

/// True when only terminal punctuation, whitespace or closing quotes follow
/// the marker.
pub fn is_terminal(sentence: &str, marker: &CitationMarker) -> bool {
    sentence.chars().skip(marker.span.1).all(is_terminal_tail)
}

/// Applies the rule filter to one sentence.
pub fn check_single_source(sentence: &str) -> Result<CitationMarker, RejectReason> {
    let mut markers = parse_markers(sentence);
    match markers.len() {
        0 => return Err(RejectReason::NoMarker),
        1 => {}
        _ => return Err(RejectReason::MultipleMarkers),
    }
    let m = markers.pop().unwrap();
    if !is_terminal(sentence, &m) {
        return Err(RejectReason::NotTerminal);
    }
    if m.keys.len() != 1 {
        return Err(RejectReason::MultipleKeys);
    }
    Ok(m)
}

/// The marker iff the sentence has exactly one marker, it is terminal, and
/// it carries a single key.
pub fn is_single_source_reporting_candidate(sentence: &str) -> Option<CitationMarker> {
    check_single_source(sentence).ok()
}

pub trait BackgroundClassifier: Send + Sync {
    /// Raw confidences, one per sentence, in input order.
    fn confidences(&self, sentences: &[&str]) -> Result<Vec<f64>, TransportError>;
}

/// `(label, confidence)` per sentence with the fixed decision threshold.
pub fn classify_background(
    sentences: &[&str],
    classifier: &dyn BackgroundClassifier,
) -> Result<Vec<(bool, f64)>, TransportError> {
    let conf = classifier.confidences(sentences)?;
    if conf.len() != sentences.len() {
        return Err(TransportError::Protocol(format!("expected {} confidences, got {}", sentences.len(), conf.len())));
    }
    Ok(conf.into_iter().map(|c| (c >= BACKGROUND_THRESHOLD, c)).collect())
}

const REPORTING_CUES: &[&str] = &[
    "show",
    "shows",
    "shown",
    "showed",
    "find",
    "finds",
    "found",
    "demonstrate",
    "demonstrates",
    "demonstrated",
    "report",
    "reports",
    "reported",
    "reveal",
    "reveals",
    "revealed",
    "suggest",
    "suggests",
    "suggested",
    "indicate",
    "indicates",
    "indicated",
    "observe",
    "observes",
    "observed",
    "estimate",
    "estimates",
    "estimated",
];

/// Lexicon stand-in for the learned background classifier: confidence 1.0
/// when the sentence contains a reporting verb, else 0.0.
#[derive(Debug, Clone, Copy, Default)]
pub struct BaselineBackgroundClassifier;

impl BaselineBackgroundClassifier {
    pub fn confidence(sentence: &str) -> f64 {
        let hit = sentence
            .split(|c: char| !c.is_alphabetic())
            .filter(|w| !w.is_empty())
            .any(|w| REPORTING_CUES.contains(&w.to_lowercase().as_str()));
        if hit {
            1.0
        } else {
            0.0
        }
    }
}

impl BackgroundClassifier for BaselineBackgroundClassifier {
    fn confidences(&self, sentences: &[&str]) -> Result<Vec<f64>, TransportError> {
        Ok(sentences.iter().map(|s| Self::confidence(s)).collect())
    }
}

/// Per-paper extraction result. Every body sentence lands in exactly one of
/// `instances` or `rejected`.
#[derive(Debug, Clone, Default)]
pub struct Extraction {
    pub instances: Vec<CitationInstance>,
    pub rejected: Vec<(usize, RejectReason)>,
}

/// Rule filter, key resolution, then the background gate. Only sentences that
/// survive the first two are sent to the classifier.
pub fn extract_reporting_citations(
    paper: &Paper,
    classifier: &dyn BackgroundClassifier,
) -> Result<Extraction, TransportError> {
    let mut out = Extraction::default();
    let mut pending: Vec<(usize, CitationMarker, PaperId)> = Vec::new();
    for (idx, sentence) in paper.body_sentences.iter().enumerate() {
        let marker = match check_single_source(sentence) {
            Ok(m) => m,
            Err(r) => {
                out.rejected.push((idx, r));
                continue;
            }
        };
        match paper.reference(&marker.keys[0]) {
            None => out.rejected.push((idx, RejectReason::UnknownKey)),
            Some(entry) => match &entry.cited_paper_id {
                Some(cited) if *cited != paper.paper_id => pending.push((idx, marker, cited.clone())),
                _ => out.rejected.push((idx, RejectReason::UnresolvedReference)),
            },
        }
    }

    let texts: Vec<&str> = pending.iter().map(|(i, _, _)| paper.body_sentences[*i].as_str()).collect();
    let labels = if texts.is_empty() { Vec::new() } else { classify_background(&texts, classifier)? };
    for ((idx, marker, cited), (is_bg, conf)) in pending.into_iter().zip(labels) {
        if is_bg {
            out.instances.push(CitationInstance {
                citing_paper_id: paper.paper_id.clone(),
                sentence_index: idx,
                sentence_text: paper.body_sentences[idx].clone(),
                cited_paper_id: cited,
                marker,
                is_background: true,
                background_confidence: conf,
            });
        } else {
            out.rejected.push((idx, RejectReason::NotBackground));
        }
    }
    out.rejected.sort_unstable();
    Ok(out)
}

/// Line form written by the extract stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CitationRecord {
    pub citing_paper_id: PaperId,
    pub sentence_index: usize,
    pub sentence_text: String,
    pub cited_paper_id: PaperId,
    pub marker_span: (usize, usize),
    pub marker_style: MarkerStyle,
    pub background_confidence: f64,
}

impl From<&CitationInstance> for CitationRecord {
    fn from(c: &CitationInstance) -> Self {
        CitationRecord {
            citing_paper_id: c.citing_paper_id.clone(),
            sentence_index: c.sentence_index,
            sentence_text: c.sentence_text.clone(),
            cited_paper_id: c.cited_paper_id.clone(),
            marker_span: c.marker.span,
            marker_style: c.marker.style,
            background_confidence: c.background_confidence,
        }
    }
}

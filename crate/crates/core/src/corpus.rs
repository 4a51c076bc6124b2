//! Document model, streaming corpus ingestion, sentence segmentation and the
//! citation graph.
//!
//! Corpus files are line-delimited JSON, one paper per line. A malformed line
//! never aborts a load: it is reported as a [`RecordError`] carrying the
//! 1-based line number and the reader moves on.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type PaperId = String;

pub const MIN_YEAR: i32 = 1500;
pub const MAX_YEAR: i32 = 2100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PublicationType {
    Review,
    Journal,
    Conference,
    Other,
}

impl PublicationType {
    pub fn as_str(self) -> &'static str {
        match self {
            PublicationType::Review => "review",
            PublicationType::Journal => "journal",
            PublicationType::Conference => "conference",
            PublicationType::Other => "other",
        }
    }

    /// Lenient mapping from source labels. Anything unrecognised is `Other`.
    pub fn from_label(label: &str) -> Self {
        let l = label.trim().to_ascii_lowercase();
        match l.as_str() {
            "review" => PublicationType::Review,
            "journal" | "journalarticle" | "journal article" | "article" => PublicationType::Journal,
            "conference" | "conferencepaper" | "conference paper" | "proceedings" => PublicationType::Conference,
            _ => PublicationType::Other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorRef {
    pub author_id: String,
    /// `None` when the source has no H-index for this author.
    pub h_index: Option<u32>,
    pub position: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceEntry {
    pub marker_key: String,
    pub cited_paper_id: Option<PaperId>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Paper {
    pub paper_id: PaperId,
    pub title: String,
    pub year: i32,
    pub field: String,
    pub publication_type: PublicationType,
    pub is_open_access: bool,
    pub citation_count: u64,
    pub authors: Vec<AuthorRef>,
    pub body_sentences: Vec<String>,
    pub references: Vec<ReferenceEntry>,
}

impl Paper {
    pub fn reference(&self, marker_key: &str) -> Option<&ReferenceEntry> {
        self.references.iter().find(|r| r.marker_key == marker_key)
    }

    /// Distinct resolved cited ids, excluding self references.
    pub fn cited_ids(&self) -> BTreeSet<&str> {
        self.references.iter().filter_map(|r| r.cited_paper_id.as_deref()).filter(|id| *id != self.paper_id).collect()
    }

    /// One JSON line in the corpus schema (sentences form).
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("paper serialization is infallible")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SchemaMode {
    /// Bodies arrive pre-segmented in `body_sentences`.
    #[default]
    Sentences,
    /// Bodies arrive as `body_text` and are segmented on load.
    RawText,
}

impl std::str::FromStr for SchemaMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sentences" => Ok(SchemaMode::Sentences),
            "raw_text" => Ok(SchemaMode::RawText),
            other => Err(format!("unknown schema mode `{other}` (expected sentences|raw_text)")),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum RecordErrorKind {
    #[error("malformed record: {0}")]
    Malformed(String),
    #[error("missing required field `{0}`")]
    MissingField(&'static str),
    #[error("invalid value: {0}")]
    Invalid(String),
    #[error("duplicate paper_id `{0}`")]
    DuplicateId(String),
}

#[derive(Debug, Error, PartialEq)]
#[error("line {line}: {kind}")]
pub struct RecordError {
    pub line: usize,
    pub kind: RecordErrorKind,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read corpus {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

// Wire form. Everything optional so missing fields surface as named errors
// rather than a serde message.
#[derive(Deserialize)]
struct RawPaper {
    paper_id: Option<String>,
    title: Option<String>,
    year: Option<i64>,
    field: Option<FieldLabel>,
    publication_type: Option<String>,
    is_open_access: Option<bool>,
    citation_count: Option<u64>,
    authors: Option<Vec<RawAuthor>>,
    body_sentences: Option<Vec<String>>,
    body_text: Option<String>,
    references: Option<Vec<ReferenceEntry>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum FieldLabel {
    One(String),
    Many(Vec<String>),
}

#[derive(Deserialize)]
struct RawAuthor {
    author_id: String,
    #[serde(default)]
    h_index: Option<u32>,
    position: Option<u32>,
}

/// Parses one corpus line. `line` is only used for error reporting.
pub fn parse_record(text: &str, line: usize, mode: SchemaMode) -> Result<Paper, RecordError> {
    let err = |kind| RecordError { line, kind };
    let raw: RawPaper = serde_json::from_str(text).map_err(|e| err(RecordErrorKind::Malformed(e.to_string())))?;

    let paper_id = raw.paper_id.ok_or_else(|| err(RecordErrorKind::MissingField("paper_id")))?;
    if paper_id.is_empty() {
        return Err(err(RecordErrorKind::Invalid("empty paper_id".into())));
    }
    let year = raw.year.ok_or_else(|| err(RecordErrorKind::MissingField("year")))?;
    if !(MIN_YEAR as i64..=MAX_YEAR as i64).contains(&year) {
        return Err(err(RecordErrorKind::Invalid(format!("year {year} outside [{MIN_YEAR}, {MAX_YEAR}]"))));
    }
    // Multi-label sources: the first label is the paper's field.
    let field = match raw.field.ok_or_else(|| err(RecordErrorKind::MissingField("field")))? {
        FieldLabel::One(f) => f,
        FieldLabel::Many(v) => {
            v.into_iter().next().ok_or_else(|| err(RecordErrorKind::Invalid("empty field list".into())))?
        }
    };
    let publication_type = raw
        .publication_type
        .as_deref()
        .map(PublicationType::from_label)
        .ok_or_else(|| err(RecordErrorKind::MissingField("publication_type")))?;

    let raw_authors = raw.authors.ok_or_else(|| err(RecordErrorKind::MissingField("authors")))?;
    let mut authors = Vec::with_capacity(raw_authors.len());
    for (i, a) in raw_authors.into_iter().enumerate() {
        let position = a.position.unwrap_or(i as u32);
        if position as usize != i {
            return Err(err(RecordErrorKind::Invalid(format!(
                "author positions must be 0..n-1 in byline order (got {position} at index {i})"
            ))));
        }
        authors.push(AuthorRef { author_id: a.author_id, h_index: a.h_index, position });
    }

    let body_sentences = match mode {
        SchemaMode::Sentences => {
            raw.body_sentences.ok_or_else(|| err(RecordErrorKind::MissingField("body_sentences")))?
        }
        SchemaMode::RawText => {
            segment_sentences(&raw.body_text.ok_or_else(|| err(RecordErrorKind::MissingField("body_text")))?)
        }
    };

    let references = raw.references.unwrap_or_default();
    let mut keys = HashSet::new();
    for r in &references {
        if !keys.insert(r.marker_key.as_str()) {
            return Err(err(RecordErrorKind::Invalid(format!("duplicate reference marker_key `{}`", r.marker_key))));
        }
    }

    Ok(Paper {
        paper_id,
        title: raw.title.unwrap_or_default(),
        year: year as i32,
        field,
        publication_type,
        is_open_access: raw.is_open_access.ok_or_else(|| err(RecordErrorKind::MissingField("is_open_access")))?,
        citation_count: raw.citation_count.ok_or_else(|| err(RecordErrorKind::MissingField("citation_count")))?,
        authors,
        body_sentences,
        references,
    })
}

/// Streaming reader over a corpus file. Yields papers in file order; each
/// item is either a paper or the error that caused its line to be skipped.
pub struct CorpusReader<R> {
    lines: io::Lines<R>,
    line_no: usize,
    mode: SchemaMode,
    seen: HashSet<String>,
}

impl<R: BufRead> CorpusReader<R> {
    pub fn new(reader: R, mode: SchemaMode) -> Self {
        CorpusReader { lines: reader.lines(), line_no: 0, mode, seen: HashSet::new() }
    }
}

impl<R: BufRead> Iterator for CorpusReader<R> {
    type Item = Result<Paper, RecordError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = self.lines.next()?;
            self.line_no += 1;
            let text = match line {
                Ok(t) => t,
                Err(e) => {
                    return Some(Err(RecordError {
                        line: self.line_no,
                        kind: RecordErrorKind::Malformed(e.to_string()),
                    }))
                }
            };
            if text.trim().is_empty() {
                continue;
            }
            let rec = parse_record(&text, self.line_no, self.mode).and_then(|p| {
                if self.seen.insert(p.paper_id.clone()) {
                    Ok(p)
                } else {
                    Err(RecordError { line: self.line_no, kind: RecordErrorKind::DuplicateId(p.paper_id) })
                }
            });
            return Some(rec);
        }
    }
}

pub fn load_corpus(path: &Path, mode: SchemaMode) -> Result<CorpusReader<BufReader<File>>, CorpusError> {
    let file = File::open(path).map_err(|source| CorpusError::Io { path: path.display().to_string(), source })?;
    Ok(CorpusReader::new(BufReader::new(file), mode))
}

/// Result of an eager load: papers in file order plus every skipped line.
#[derive(Debug, Default)]
pub struct LoadedCorpus {
    pub papers: Vec<Paper>,
    pub skipped: Vec<RecordError>,
}

/// Loads the whole file, parsing lines in parallel on the current rayon pool.
/// Output order equals file order regardless of worker count.
pub fn load_corpus_parallel(path: &Path, mode: SchemaMode) -> Result<LoadedCorpus, CorpusError> {
    let io_err = |source| CorpusError::Io { path: path.display().to_string(), source };
    let file = File::open(path).map_err(io_err)?;
    let mut lines = Vec::new();
    for (i, l) in BufReader::new(file).lines().enumerate() {
        let l = l.map_err(io_err)?;
        if !l.trim().is_empty() {
            lines.push((i + 1, l));
        }
    }
    let parsed: Vec<Result<Paper, RecordError>> = lines.par_iter().map(|(n, l)| parse_record(l, *n, mode)).collect();

    let mut out = LoadedCorpus::default();
    let mut seen = HashSet::new();
    for (rec, (line, _)) in parsed.into_iter().zip(&lines) {
        match rec {
            Ok(p) if seen.insert(p.paper_id.clone()) => out.papers.push(p),
            Ok(p) => out.skipped.push(RecordError { line: *line, kind: RecordErrorKind::DuplicateId(p.paper_id) }),
            Err(e) => out.skipped.push(e),
        }
    }
    Ok(out)
}

pub fn write_corpus<W: Write>(mut w: W, papers: &[Paper]) -> io::Result<()> {
    for p in papers {
        writeln!(w, "{}", p.to_json_line())?;
    }
    Ok(())
}

const ABBREVIATIONS: &[&str] = &["e.g", "i.e", "Fig", "Eq", "vs", "Dr", "No"];
const CLOSERS: &[char] = &['"', '\'', ')', ']', '\u{201d}', '\u{2019}', '\u{bb}'];

fn is_guarded(prefix: &str) -> bool {
    // `prefix` ends just before the terminal period.
    let mut words = prefix.rsplit(' ');
    let last = words.next().unwrap_or("").trim_start_matches(['(', '[', '"', '\u{201c}']);
    if last == "al" {
        return words.next() == Some("et");
    }
    if ABBREVIATIONS.contains(&last) {
        return true;
    }
    let mut chars = last.chars();
    matches!((chars.next(), chars.next()), (Some(c), None) if c.is_uppercase())
}

/// Splits plain text into sentences.
///
/// Whitespace runs collapse to single spaces, so joining the output with `" "`
/// gives back the normalised input. A boundary is `.`, `!` or `?` (optionally
/// followed by closing quotes/brackets) then a space then an uppercase letter
/// or digit, unless the period ends a guarded abbreviation.
pub fn segment_sentences(body: &str) -> Vec<String> {
    let text = body.split_whitespace().collect::<Vec<_>>().join(" ");
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if matches!(c, '.' | '!' | '?') {
            let mut j = i + 1;
            while j < chars.len() && (CLOSERS.contains(&chars[j].1) || matches!(chars[j].1, '.' | '!' | '?')) {
                j += 1;
            }
            let boundary = j + 1 < chars.len()
                && chars[j].1 == ' '
                && (chars[j + 1].1.is_uppercase() || chars[j + 1].1.is_ascii_digit());
            if boundary && !(c == '.' && j == i + 1 && is_guarded(&text[start..pos])) {
                let end = chars[j].0;
                out.push(text[start..end].to_string());
                start = chars[j + 1].0;
                i = j + 1;
                continue;
            }
            i = j;
            continue;
        }
        i += 1;
    }
    if start < text.len() {
        out.push(text[start..].to_string());
    }
    out
}

/// Directed citation graph over resolved references.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CitationGraph {
    pub edges: BTreeMap<PaperId, Vec<PaperId>>,
    pub reverse: BTreeMap<PaperId, Vec<PaperId>>,
    /// References without a `cited_paper_id`.
    pub unresolved: usize,
}

impl CitationGraph {
    pub fn cites(&self, citing: &str, cited: &str) -> bool {
        self.edges.get(citing).is_some_and(|v| v.binary_search_by(|x| x.as_str().cmp(cited)).is_ok())
    }

    pub fn cited_by(&self, cited: &str) -> &[PaperId] {
        self.reverse.get(cited).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn out(&self, citing: &str) -> &[PaperId] {
        self.edges.get(citing).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn edge_count(&self) -> usize {
        self.edges.values().map(Vec::len).sum()
    }

    /// Builds a graph from an explicit edge list (self-loops dropped).
    pub fn from_edges<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        let mut edges: BTreeMap<PaperId, BTreeSet<PaperId>> = BTreeMap::new();
        for (a, b) in pairs {
            if a != b {
                edges.entry(a.to_string()).or_default().insert(b.to_string());
            }
        }
        Self::from_sets(edges, 0)
    }

    fn from_sets(edges: BTreeMap<PaperId, BTreeSet<PaperId>>, unresolved: usize) -> Self {
        let mut reverse: BTreeMap<PaperId, Vec<PaperId>> = BTreeMap::new();
        for (citing, cited) in &edges {
            for c in cited {
                reverse.entry(c.clone()).or_default().push(citing.clone());
            }
        }
        // citing keys are visited in sorted order, so reverse lists are sorted
        CitationGraph {
            edges: edges.into_iter().map(|(k, v)| (k, v.into_iter().collect())).collect(),
            reverse,
            unresolved,
        }
    }
}

/// One edge per distinct resolved (citing, cited) pair. Per-worker partial
/// maps are merged, so the result does not depend on the pool size.
pub fn build_citation_graph(papers: &[Paper]) -> CitationGraph {
    let (edges, unresolved) = papers
        .par_iter()
        .fold(
            || (BTreeMap::<PaperId, BTreeSet<PaperId>>::new(), 0usize),
            |(mut m, mut u), p| {
                u += p.references.iter().filter(|r| r.cited_paper_id.is_none()).count();
                let cited: BTreeSet<PaperId> = p.cited_ids().into_iter().map(str::to_string).collect();
                if !cited.is_empty() {
                    m.entry(p.paper_id.clone()).or_default().extend(cited);
                }
                (m, u)
            },
        )
        .reduce(
            || (BTreeMap::new(), 0),
            |(mut a, ua), (b, ub)| {
                for (k, v) in b {
                    a.entry(k).or_default().extend(v);
                }
                (a, ua + ub)
            },
        );
    CitationGraph::from_sets(edges, unresolved)
}

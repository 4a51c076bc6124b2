use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::corpus::{Paper, PublicationType};
use crate::fidelity::PairRecord;

/// One observation of the regression. Seniority and team size are `None`
/// when author metadata is missing; such rows are dropped listwise from fits
/// that use those predictors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub fidelity: f64,
    pub field_of_study: String,
    pub publication_year: i32,
    pub publication_type: PublicationType,
    pub open_access: bool,
    pub context_length: f64,
    pub reference_frequency: u32,
    pub publication_interval: f64,
    pub paper_citation: f64,
    pub author_seniority: Option<f64>,
    pub team_size: Option<u32>,
    pub self_citation: bool,
    pub within_field: bool,
    pub first_author_seniority: Option<f64>,
    pub last_author_seniority: Option<f64>,
}

/// Builds the regression variables for one scored citation.
///
/// Field, year and type describe the citing paper; open access and citation
/// count describe the cited paper. `reference_frequency` is the number of
/// extracted reporting citations in `citing` that point at `cited`.
pub fn derive_features(record: &PairRecord, citing: &Paper, cited: &Paper, reference_frequency: u32) -> FeatureRow {
    let context_length =
        citing.body_sentences.get(record.citing_sentence_index).map(|s| s.chars().count()).unwrap_or(0) as f64;

    let h: Vec<Option<u32>> = citing.authors.iter().map(|a| a.h_index).collect();
    let author_seniority =
        if h.is_empty() || h.iter().any(Option::is_none) { None } else { h.iter().flatten().max().map(|&m| m as f64) };
    let first_author_seniority = h.first().copied().flatten().map(f64::from);
    let last_author_seniority = h.last().copied().flatten().map(f64::from);

    let cited_authors: HashSet<&str> = cited.authors.iter().map(|a| a.author_id.as_str()).collect();
    let self_citation = citing.authors.iter().any(|a| cited_authors.contains(a.author_id.as_str()));

    FeatureRow {
        fidelity: record.fidelity.value(),
        field_of_study: citing.field.clone(),
        publication_year: citing.year,
        publication_type: citing.publication_type,
        open_access: cited.is_open_access,
        context_length,
        reference_frequency: reference_frequency.max(1),
        publication_interval: f64::from(citing.year - cited.year),
        paper_citation: cited.citation_count as f64,
        author_seniority,
        team_size: (!citing.authors.is_empty()).then_some(citing.authors.len() as u32),
        self_citation,
        within_field: citing.field == cited.field,
        first_author_seniority,
        last_author_seniority,
    }
}

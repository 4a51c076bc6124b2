//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

pub mod stub;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;

use citefid_core::corpus::{AuthorRef, Paper, PublicationType, ReferenceEntry};
use citefid_core::fidelity::{FidelityScore, PairRecord, ScorerId};
use citefid_core::telephone::PaperMeta;

/// The four example sentences of the reporting-citation table, with the
/// expected verdict (`None` = valid) for each.
pub const REPORTING_EXAMPLES: [(&str, Option<&str>); 4] = [
    (
        "Past work has shown that active contributors in r/science are largely already involved in scientific activity [17].",
        None,
    ),
    (
        "Existing studies in NLP to help automate the study have examined exaggeration [17], certainty [18], and fact checking [19], among others.",
        Some("multiple_markers"),
    ),
    ("We use GROBID [12], a more commonly used and actively developed tool.", Some("not_terminal")),
    ("The finding was in accordance with former studies (Lee et al. 2020).", Some("not_background")),
];

pub fn paper(id: &str, sentences: &[&str], refs: &[(&str, Option<&str>)]) -> Paper {
    Paper {
        paper_id: id.into(),
        title: "Fixture".into(),
        year: 2021,
        field: "Computer Science".into(),
        publication_type: PublicationType::Conference,
        is_open_access: true,
        citation_count: 0,
        authors: vec![AuthorRef { author_id: "a1".into(), h_index: Some(4), position: 0 }],
        body_sentences: sentences.iter().map(|s| s.to_string()).collect(),
        references: refs
            .iter()
            .map(|(k, c)| ReferenceEntry { marker_key: k.to_string(), cited_paper_id: c.map(str::to_string) })
            .collect(),
    }
}

/// A paper embedding the four example sentences, every marker resolvable.
pub fn reporting_examples_paper() -> Paper {
    let sentences: Vec<&str> = REPORTING_EXAMPLES.iter().map(|(s, _)| *s).collect();
    paper(
        "FIXTURE",
        &sentences,
        &[
            ("12", Some("GROBID")),
            ("17", Some("R17")),
            ("18", Some("R18")),
            ("19", Some("R19")),
            ("Lee 2020", Some("LEE")),
        ],
    )
}

// ---------------------------------------------------------------- scoring

/// Token set for the baseline scorer, written independently of the library:
/// lowercase, split on anything that is not an ASCII letter/digit or a Latin
/// Extended letter, drop single-character tokens.
pub fn oracle_tokens(s: &str) -> BTreeSet<String> {
    let lower = s.to_lowercase();
    let mut out = BTreeSet::new();
    let mut cur = String::new();
    for ch in lower.chars().chain(std::iter::once(' ')) {
        let code = ch as u32;
        let latin = ch.is_ascii_alphanumeric() || ((0xC0..=0x24F).contains(&code) && code != 0xD7 && code != 0xF7);
        if latin {
            cur.push(ch);
        } else {
            if cur.chars().count() > 1 {
                out.insert(cur.clone());
            }
            cur.clear();
        }
    }
    out
}

pub fn oracle_jaccard(a: &str, b: &str) -> Option<f64> {
    let (ta, tb) = (oracle_tokens(a), oracle_tokens(b));
    let union = ta.union(&tb).count();
    (union > 0).then(|| ta.intersection(&tb).count() as f64 / union as f64)
}

pub fn oracle_score(a: &str, b: &str) -> f64 {
    match oracle_jaccard(a, b) {
        Some(j) => 1.0 + 4.0 * j,
        None => 5.0,
    }
}

// ------------------------------------------------------------- regression

/// Least squares through the normal equations XᵀX β = Xᵀy, solved by
/// Gauss-Jordan elimination with partial pivoting.
pub fn normal_equations(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let k = x[0].len();
    let mut a = vec![vec![0.0; k + 1]; k];
    for (row, &yi) in x.iter().zip(y) {
        for i in 0..k {
            for j in 0..k {
                a[i][j] += row[i] * row[j];
            }
            a[i][k] += row[i] * yi;
        }
    }
    for col in 0..k {
        let piv = (col..k).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs())).unwrap();
        a.swap(col, piv);
        let d = a[col][col];
        for v in a[col].iter_mut() {
            *v /= d;
        }
        for r in 0..k {
            if r != col {
                let f = a[r][col];
                if f != 0.0 {
                    for c in 0..=k {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
    }
    a.iter().map(|r| r[k]).collect()
}

// -------------------------------------------------------------- telephone

/// A random citation graph over nodes `N000..`, with scored records on most
/// edges (some edges carry two records at different sentences) and metadata
/// on most nodes. Node index order equals id order.
pub struct TelephoneInstance {
    pub ids: Vec<String>,
    pub adj: Vec<Vec<bool>>,
    pub records: Vec<PairRecord>,
    pub meta: HashMap<String, PaperMeta>,
}

pub fn random_telephone_instance(rng: &mut impl Rng, n: usize, p: f64) -> TelephoneInstance {
    let ids: Vec<String> = (0..n).map(|i| format!("N{i:03}")).collect();
    let mut adj = vec![vec![false; n]; n];
    let mut records = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j || !rng.gen_bool(p) {
                continue;
            }
            adj[i][j] = true;
            if rng.gen_bool(0.85) {
                let copies = if rng.gen_bool(0.2) { 2 } else { 1 };
                let mut sentences: Vec<usize> = (0..6).collect();
                sentences.shuffle(rng);
                for &s in &sentences[..copies] {
                    records.push(PairRecord {
                        citing_paper_id: ids[i].clone(),
                        citing_sentence_index: s,
                        cited_paper_id: ids[j].clone(),
                        matched_claim_index: rng.gen_range(0..2),
                        fidelity: FidelityScore::new(rng.gen_range(1.0..=5.0)).unwrap(),
                        n_candidates: 2,
                        scorer: ScorerId::new("random", "1"),
                    });
                }
            }
        }
    }
    records.shuffle(rng);
    let fields = ["Physics", "Biology"];
    let mut meta = HashMap::new();
    for id in &ids {
        if rng.gen_bool(0.95) {
            meta.insert(
                id.clone(),
                PaperMeta { year: rng.gen_range(2000..2003), field: fields[rng.gen_range(0..2)].into() },
            );
        }
    }
    TelephoneInstance { ids, adj, records, meta }
}

impl TelephoneInstance {
    pub fn edge_list(&self) -> Vec<(&str, &str)> {
        let mut out = Vec::new();
        for (i, row) in self.adj.iter().enumerate() {
            for (j, &e) in row.iter().enumerate() {
                if e {
                    out.push((self.ids[i].as_str(), self.ids[j].as_str()));
                }
            }
        }
        out
    }

    /// Earliest-sentence record per (citing, cited) index pair.
    pub fn record_matrix(&self) -> HashMap<(usize, usize), PairRecord> {
        let pos: HashMap<&str, usize> = self.ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut m: HashMap<(usize, usize), PairRecord> = HashMap::new();
        for r in &self.records {
            let key = (pos[r.citing_paper_id.as_str()], pos[r.cited_paper_id.as_str()]);
            let keep = m.get(&key).map_or(true, |e| r.citing_sentence_index < e.citing_sentence_index);
            if keep {
                m.insert(key, r.clone());
            }
        }
        m
    }
}

/// Every ordered node triple checked against B→A, C→A, C→B. Returns scored
/// triples (both C→A and B→A records present) and the count of the rest.
pub fn brute_force_triples(inst: &TelephoneInstance) -> (Vec<(usize, usize, usize)>, usize) {
    let n = inst.ids.len();
    let rec = inst.record_matrix();
    let mut scored = Vec::new();
    let mut unscored = 0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if a == b || b == c || a == c {
                    continue;
                }
                if inst.adj[b][a] && inst.adj[c][a] && inst.adj[c][b] {
                    if rec.contains_key(&(c, a)) && rec.contains_key(&(b, a)) {
                        scored.push((a, b, c));
                    } else {
                        unscored += 1;
                    }
                }
            }
        }
    }
    (scored, unscored)
}

/// Greedy exact matcher written directly from the matching rules:
/// triples in (A, B, C) order; candidate D in id order; D cites A with a
/// record, D is not treated for A, D cites nothing that cites A, same year,
/// field and matched claim as C, each D used once per A.
pub fn brute_force_matching(inst: &TelephoneInstance, triples: &[(usize, usize, usize)]) -> (Vec<[usize; 4]>, usize) {
    let n = inst.ids.len();
    let rec = inst.record_matrix();
    let meta = |i: usize| inst.meta.get(&inst.ids[i]);
    let mut treated: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for &(a, _, c) in triples {
        treated.entry(a).or_default().insert(c);
    }
    let mut ordered = triples.to_vec();
    ordered.sort();
    let mut used: HashSet<(usize, usize)> = HashSet::new();
    let mut matched = Vec::new();
    let mut unmatched = 0;
    for (a, b, c) in ordered {
        let claim = rec[&(c, a)].matched_claim_index;
        let found = (0..n).find(|&d| {
            d != a
                && inst.adj[d][a]
                && !treated[&a].contains(&d)
                && !used.contains(&(a, d))
                && !(0..n).any(|x| inst.adj[x][a] && inst.adj[d][x])
                && rec.get(&(d, a)).is_some_and(|r| r.matched_claim_index == claim)
                && matches!((meta(d), meta(c)), (Some(md), Some(mc)) if md == mc)
        });
        match found {
            Some(d) => {
                used.insert((a, d));
                matched.push([a, b, c, d]);
            }
            None => unmatched += 1,
        }
    }
    (matched, unmatched)
}

// ----------------------------------------------------------------- report

/// Histogram over [1, 5] in 0.1 bins by direct comparison with each edge.
pub fn histogram_oracle(scores: &[f64]) -> Vec<usize> {
    let mut counts = vec![0; 40];
    for &x in scores {
        for (k, c) in counts.iter_mut().enumerate() {
            let lo = (10 + k) as f64 / 10.0;
            let hi = (11 + k) as f64 / 10.0;
            if lo <= x && (x < hi || (k == 39 && x <= hi)) {
                *c += 1;
                break;
            }
        }
    }
    counts
}

//! Seeded synthetic data: a small corpus with realistic citation texture,
//! regression rows with known coefficients, and a telephone-effect scenario
//! with a known treatment effect.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::analysis::FeatureRow;
use crate::corpus::{AuthorRef, CitationGraph, Paper, PaperId, PublicationType, ReferenceEntry};
use crate::fidelity::{FidelityScore, PairRecord, ScorerId};
use crate::telephone::PaperMeta;

pub const FIELDS: [&str; 7] =
    ["Physics", "Biology", "Medicine", "Psychology", "Engineering", "Computer Science", "Environmental Science"];

const SURNAMES: [&str; 40] = [
    "Smith",
    "Lee",
    "Garcia",
    "Chen",
    "Novak",
    "Okafor",
    "Silva",
    "Kowalski",
    "Nguyen",
    "Haddad",
    "Larsen",
    "Moreau",
    "Tanaka",
    "Ivanova",
    "Rossi",
    "Murphy",
    "Fischer",
    "Kim",
    "Patel",
    "Andersson",
    "Dubois",
    "Costa",
    "Yilmaz",
    "Schmidt",
    "Park",
    "Mensah",
    "Horvat",
    "Jensen",
    "Alvarez",
    "Kaur",
    "Brennan",
    "Sato",
    "Weber",
    "Popescu",
    "Oliveira",
    "Nakamura",
    "Berg",
    "Quinn",
    "Zhao",
    "Walsh",
];

const SUBJECTS: [&str; 24] = [
    "sleep duration",
    "dietary fiber intake",
    "classroom size",
    "ambient temperature",
    "network density",
    "protein folding stability",
    "soil moisture",
    "social media use",
    "gene expression variability",
    "laser pulse width",
    "antibiotic exposure",
    "urban green space",
    "working memory load",
    "code review depth",
    "muscle fatigue",
    "grain boundary density",
    "river sediment load",
    "parental income",
    "reaction time",
    "model depth",
    "cortisol response",
    "bilingual exposure",
    "particle flux",
    "vaccination coverage",
];

const RELATIONS: [&str; 10] = [
    "increased",
    "reduced",
    "predicted",
    "improved",
    "weakened",
    "amplified",
    "stabilized",
    "shortened",
    "doubled",
    "moderated",
];

const OBJECTS: [&str; 24] = [
    "anxiety symptoms",
    "crop yield",
    "test accuracy",
    "thermal conductivity",
    "infection rates",
    "reading scores",
    "bacterial diversity",
    "heart rate variability",
    "signal fidelity",
    "carbon uptake",
    "recall performance",
    "fracture toughness",
    "hospital readmissions",
    "query latency",
    "species richness",
    "voter turnout",
    "blood pressure",
    "tumor growth",
    "error rates",
    "water quality",
    "attention span",
    "energy efficiency",
    "immune markers",
    "dropout rates",
];

const CONTEXTS: [&str; 12] = [
    "in adolescents",
    "in older adults",
    "across three cohorts",
    "under field conditions",
    "in rural schools",
    "in laboratory mice",
    "in large networks",
    "during winter months",
    "in clinical samples",
    "at high altitude",
    "in coastal regions",
    "in online settings",
];

const REPLACEMENTS: [&str; 16] = [
    "markedly",
    "several",
    "outcomes",
    "levels",
    "measures",
    "groups",
    "patterns",
    "broader",
    "related",
    "population",
    "samples",
    "changes",
    "effects",
    "indicators",
    "conditions",
    "factors",
];

const REPORT_LEADS: [&str; 6] = [
    "Previous work has shown that",
    "Earlier studies found that",
    "It has been reported that",
    "Prior research demonstrated that",
    "Recent evidence suggests that",
    "Field data revealed that",
];

struct Claim {
    subject: &'static str,
    relation: &'static str,
    object: &'static str,
    context: &'static str,
}

impl Claim {
    fn random(rng: &mut impl Rng) -> Self {
        Claim {
            subject: SUBJECTS.choose(rng).unwrap(),
            relation: RELATIONS.choose(rng).unwrap(),
            object: OBJECTS.choose(rng).unwrap(),
            context: CONTEXTS.choose(rng).unwrap(),
        }
    }

    fn proposition(&self) -> String {
        format!("{} {} {} {}", self.subject, self.relation, self.object, self.context)
    }

    /// A claim-category sentence stating the proposition.
    fn sentence(&self, rng: &mut impl Rng) -> String {
        let p = self.proposition();
        match rng.gen_range(0..7) {
            0 => format!("We find that {p}."),
            1 => format!("Results show that {p}."),
            2 => format!("Higher {} was associated with {} {}.", self.subject, self.object, self.context),
            3 => format!("In conclusion, {p}."),
            4 => format!("We conclude that {p}."),
            5 => format!("These findings suggest that {p}."),
            _ => format!(
                "{} significantly {} {} {}.",
                capitalize(self.subject),
                self.relation,
                self.object,
                self.context
            ),
        }
    }

    /// A reworded version of the proposition; `keep` is the per-word
    /// probability of keeping the original word.
    fn paraphrase(&self, keep: f64, rng: &mut impl Rng) -> String {
        self.proposition()
            .split(' ')
            .map(|w| if rng.gen_bool(keep) { w } else { REPLACEMENTS.choose(rng).unwrap() })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn background_sentence(rng: &mut impl Rng) -> String {
    let s = SUBJECTS.choose(rng).unwrap();
    let o = OBJECTS.choose(rng).unwrap();
    match rng.gen_range(0..4) {
        0 => format!("{} has received growing attention in recent years.", capitalize(s)),
        1 => format!("Understanding {o} remains an open problem."),
        2 => format!("The link between {s} and {o} is debated."),
        _ => format!("Many practitioners care about {o}."),
    }
}

fn methods_sentence(rng: &mut impl Rng) -> String {
    let s = SUBJECTS.choose(rng).unwrap();
    let o = OBJECTS.choose(rng).unwrap();
    match rng.gen_range(0..3) {
        0 => format!("We used a longitudinal design to track {s}."),
        1 => format!("Participants were recruited from {} sites.", rng.gen_range(2..12)),
        _ => format!("{} was measured at baseline and follow-up.", capitalize(o)),
    }
}

/// Publication years run from 1990 over this many years.
const YEAR_SPAN: usize = 31;

struct AuthorProfile {
    surname: &'static str,
    h_index: Option<u32>,
}

/// Generates a corpus of `n_papers` papers. Papers only cite earlier papers;
/// about one reference in three is also cited by one of the paper's other
/// references, so intermediary triangles occur. Citing sentences mix valid
/// reporting citations with every rejection case (no reporting cue,
/// mid-sentence marker, several markers, range marker, unknown key,
/// unresolved reference).
pub fn generate_corpus(n_papers: usize, seed: u64) -> Vec<Paper> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool: Vec<AuthorProfile> = (0..80)
        .map(|k| AuthorProfile {
            surname: SURNAMES[k % SURNAMES.len()],
            h_index: if rng.gen_bool(0.06) { None } else { Some(rng.gen_range(0..70)) },
        })
        .collect();

    struct Draft {
        id: PaperId,
        year: i32,
        field: &'static str,
        authors: Vec<usize>,
        claims: Vec<Claim>,
        refs: Vec<usize>,
    }

    let mut drafts: Vec<Draft> = Vec::with_capacity(n_papers);
    for i in 0..n_papers {
        let year = 1990 + (i * YEAR_SPAN / n_papers.max(1)) as i32;
        let field = if rng.gen_bool(0.3) { "Physics" } else { FIELDS.choose(&mut rng).unwrap() };
        let team = rng.gen_range(1..=7usize);
        let mut authors: Vec<usize> = Vec::new();
        while authors.len() < team {
            let a = rng.gen_range(0..pool.len());
            if !authors.contains(&a) {
                authors.push(a);
            }
        }
        let claims = (0..rng.gen_range(3..=6)).map(|_| Claim::random(&mut rng)).collect();

        let mut refs: BTreeSet<usize> = BTreeSet::new();
        if i > 0 {
            let want = rng.gen_range(2..=7).min(i);
            while refs.len() < want {
                // favour recent papers
                let back = ((rng.gen::<f64>().powi(2)) * i as f64) as usize;
                refs.insert(i - 1 - back.min(i - 1));
            }
            let direct: Vec<usize> = refs.iter().copied().collect();
            for j in direct {
                if rng.gen_bool(0.45) {
                    if let Some(&k) = drafts[j].refs.choose(&mut rng) {
                        refs.insert(k);
                    }
                }
            }
        }
        let mut refs: Vec<usize> = refs.into_iter().collect();
        refs.shuffle(&mut rng);
        drafts.push(Draft { id: format!("P{i:04}"), year, field, authors, claims, refs });
    }

    let mut in_corpus_citations = vec![0u64; n_papers];
    for d in &drafts {
        for &j in &d.refs {
            in_corpus_citations[j] += 1;
        }
    }

    let mut papers = Vec::with_capacity(n_papers);
    for (i, d) in drafts.iter().enumerate() {
        let n_external = usize::from(rng.gen_bool(0.3));
        // author-year keys when they are unique within this paper
        let ay_keys: Vec<String> = d
            .refs
            .iter()
            .map(|&j| format!("{} {}", pool[drafts[j].authors[0]].surname, drafts[j].year))
            .chain((0..n_external).map(|e| format!("{} {}", SURNAMES[(i + e * 7) % SURNAMES.len()], 1970 + i % 20)))
            .collect();
        let unique = ay_keys.iter().collect::<BTreeSet<_>>().len() == ay_keys.len();
        let author_year = unique && rng.gen_bool(0.4);

        let keys: Vec<String> =
            if author_year { ay_keys } else { (1..=d.refs.len() + n_external).map(|k| k.to_string()).collect() };
        let marker = |k: usize, rng: &mut ChaCha8Rng| -> String {
            if author_year {
                let (surname, year) = keys[k].rsplit_once(' ').unwrap();
                match rng.gen_range(0..3) {
                    0 => format!("({surname}, {year})"),
                    1 => format!("({surname} et al., {year})"),
                    _ => format!("({surname} et al. {year})"),
                }
            } else {
                format!("[{}]", keys[k])
            }
        };

        let mut references: Vec<ReferenceEntry> = d
            .refs
            .iter()
            .enumerate()
            .map(|(k, &j)| ReferenceEntry { marker_key: keys[k].clone(), cited_paper_id: Some(drafts[j].id.clone()) })
            .collect();
        references.extend(
            (0..n_external)
                .map(|e| ReferenceEntry { marker_key: keys[d.refs.len() + e].clone(), cited_paper_id: None }),
        );

        let mut body: Vec<String> = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            body.push(background_sentence(&mut rng));
        }
        for (k, &j) in d.refs.iter().enumerate() {
            let cited = &drafts[j];
            let roll = rng.gen_range(0..100);
            let m = marker(k, &mut rng);
            let sentence = if roll < 62 {
                let claim = cited.claims.choose(&mut rng).unwrap();
                let keep = rng.gen_range(0.25..1.0);
                let lead = REPORT_LEADS.choose(&mut rng).unwrap();
                format!("{lead} {} {m}.", claim.paraphrase(keep, &mut rng))
            } else if roll < 72 {
                format!("This is in line with earlier work {m}.")
            } else if roll < 82 {
                format!("Following {m}, we adopt a similar protocol.")
            } else if roll < 92 && d.refs.len() > 1 {
                let other = marker((k + 1) % d.refs.len(), &mut rng);
                format!("Related effects were observed in several settings {m}, {other}.")
            } else {
                let claim = cited.claims.choose(&mut rng).unwrap();
                format!("Earlier studies found that {} {m}.", claim.proposition())
            };
            body.push(sentence);
            if roll < 62 && rng.gen_bool(0.15) {
                let claim = cited.claims.choose(&mut rng).unwrap();
                let m = marker(k, &mut rng);
                body.push(format!("It was also shown that {} {m}.", claim.paraphrase(0.7, &mut rng)));
            }
        }
        for e in 0..n_external {
            let m = marker(d.refs.len() + e, &mut rng);
            let claim = Claim::random(&mut rng);
            body.push(format!("Others reported that {} {m}.", claim.proposition()));
        }
        if !author_year && d.refs.len() >= 3 && rng.gen_bool(0.3) {
            body.push(format!("Several groups studied this question [1-{}].", d.refs.len().min(3)));
        }
        if !author_year && rng.gen_bool(0.05) {
            body.push(format!("A related dataset was described before [{}].", d.refs.len() + n_external + 40));
        }
        let n_methods = rng.gen_range(1..=3);
        for _ in 0..n_methods {
            body.push(methods_sentence(&mut rng));
        }
        let others = body.len();
        let n_claims = ((others as f64) * 0.3 / 0.7).round().max(2.0) as usize;
        for c in 0..n_claims {
            let claim = &d.claims[c % d.claims.len()];
            body.push(claim.sentence(&mut rng));
        }

        papers.push(Paper {
            paper_id: d.id.clone(),
            title: format!("{} and {}", capitalize(d.claims[0].subject), d.claims[0].object),
            year: d.year,
            field: d.field.to_string(),
            publication_type: *[
                PublicationType::Journal,
                PublicationType::Journal,
                PublicationType::Conference,
                PublicationType::Review,
                PublicationType::Other,
            ]
            .choose(&mut rng)
            .unwrap(),
            is_open_access: rng.gen_bool(0.45),
            citation_count: in_corpus_citations[i] + rng.gen_range(0..400),
            authors: d
                .authors
                .iter()
                .enumerate()
                .map(|(pos, &a)| AuthorRef {
                    author_id: format!("au{a:03}"),
                    h_index: pool[a].h_index,
                    position: pos as u32,
                })
                .collect(),
            body_sentences: body,
            references,
        });
    }
    papers
}

/// Regression rows drawn from a linear model with known coefficients, keyed
/// by design-column name under the main specification.
pub struct PlantedRegression {
    pub rows: Vec<FeatureRow>,
    pub truth: BTreeMap<String, f64>,
}

/// Coefficients of the main model used as the planted truth (fields, types
/// and continuous effects from the published fit; year effects invented).
pub fn planted_coefficients() -> BTreeMap<String, f64> {
    [
        ("Intercept", 3.348),
        ("Field.of.Study[Biology]", 0.245),
        ("Field.of.Study[Medicine]", 0.231),
        ("Field.of.Study[Psychology]", 0.129),
        ("Field.of.Study[Engineering]", 0.116),
        ("Field.of.Study[Computer Science]", 0.039),
        ("Field.of.Study[Environmental Science]", -0.003),
        ("Publication.Year[1998]", -0.05),
        ("Publication.Year[1999]", -0.02),
        ("Publication.Year[2001]", 0.01),
        ("Publication.Year[2002]", 0.03),
        ("Publication.Year[2003]", 0.02),
        ("Publication.Year[2004]", 0.04),
        ("Publication.Type[review]", 0.080),
        ("Publication.Type[journal]", 0.058),
        ("Publication.Type[conference]", 0.032),
        ("Open.Access", 0.024),
        ("Context.Length", 0.003),
        ("Reference.Frequency", -0.016),
        ("Publication.Interval", -0.007),
        ("Paper.Citation", -4.10e-6),
        ("Author.Seniority", -0.001),
        ("Team.Size", 6.86e-6),
        ("Self.Citation", 0.017),
        ("Within.Field", 0.029),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

pub fn planted_regression(n: usize, sigma: f64, seed: u64) -> PlantedRegression {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth = planted_coefficients();
    let noise = Normal::new(0.0, sigma).expect("sigma >= 0");
    let types =
        [PublicationType::Review, PublicationType::Journal, PublicationType::Conference, PublicationType::Other];
    let b = |k: &str| truth.get(k).copied().unwrap_or(0.0);
    let rows = (0..n)
        .map(|_| {
            let mut row = FeatureRow {
                fidelity: 0.0,
                field_of_study: FIELDS.choose(&mut rng).unwrap().to_string(),
                publication_year: rng.gen_range(1998..=2004),
                publication_type: *types.choose(&mut rng).unwrap(),
                open_access: rng.gen_bool(0.5),
                context_length: f64::from(rng.gen_range(40..400)),
                reference_frequency: rng.gen_range(1..=5),
                publication_interval: f64::from(rng.gen_range(0..=30)),
                paper_citation: f64::from(rng.gen_range(0..5000)),
                author_seniority: Some(f64::from(rng.gen_range(0..=80))),
                team_size: Some(rng.gen_range(1..=15)),
                self_citation: rng.gen_bool(0.2),
                within_field: rng.gen_bool(0.6),
                first_author_seniority: Some(f64::from(rng.gen_range(0..=40))),
                last_author_seniority: Some(f64::from(rng.gen_range(0..=80))),
            };
            let flag = |x: bool| if x { 1.0 } else { 0.0 };
            let mean = b("Intercept")
                + b(&format!("Field.of.Study[{}]", row.field_of_study))
                + b(&format!("Publication.Year[{}]", row.publication_year))
                + b(&format!("Publication.Type[{}]", row.publication_type.as_str()))
                + b("Open.Access") * flag(row.open_access)
                + b("Context.Length") * row.context_length
                + b("Reference.Frequency") * f64::from(row.reference_frequency)
                + b("Publication.Interval") * row.publication_interval
                + b("Paper.Citation") * row.paper_citation
                + b("Author.Seniority") * row.author_seniority.unwrap()
                + b("Team.Size") * f64::from(row.team_size.unwrap())
                + b("Self.Citation") * flag(row.self_citation)
                + b("Within.Field") * flag(row.within_field);
            row.fidelity = mean + noise.sample(&mut rng);
            row
        })
        .collect();
    PlantedRegression { rows, truth }
}

/// Graph, scored pairs and paper metadata for the intermediary experiment.
pub struct TelephoneScenario {
    pub graph: CitationGraph,
    pub records: Vec<PairRecord>,
    pub meta: HashMap<PaperId, PaperMeta>,
}

fn planted_record(citing: &str, cited: &str, claim: usize, fidelity: f64) -> PairRecord {
    PairRecord {
        citing_paper_id: citing.into(),
        citing_sentence_index: 0,
        cited_paper_id: cited.into(),
        matched_claim_index: claim,
        fidelity: FidelityScore::new(fidelity.clamp(FidelityScore::MIN, FidelityScore::MAX)).unwrap(),
        n_candidates: 1,
        scorer: ScorerId::new("planted", "1"),
    }
}

/// Each original A gets three intermediary triples, one per stratum of B→A
/// fidelity (low, medium, high), each with one admissible control D. C→A
/// fidelity is `base + delta + stratum_shift[s] + noise` and D→A is
/// `base + noise`, with a per-triple base drawn from U(3, 4). Decoys per A:
/// a control that also cites an unscored intermediary, and one in another
/// field; both sort before the real control.
pub fn telephone_scenario(
    n_originals: usize,
    delta: f64,
    stratum_shift: [f64; 3],
    sigma: f64,
    seed: u64,
) -> TelephoneScenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).expect("sigma >= 0");
    let mut edges: Vec<(String, String)> = Vec::new();
    let mut records = Vec::new();
    let mut meta = HashMap::new();
    let b_ranges = [(1.5, 2.95), (3.0, 4.0), (4.05, 4.95)];

    for a_i in 0..n_originals {
        let a = format!("A{a_i:05}");
        let field = FIELDS[a_i % FIELDS.len()];
        let other_field = FIELDS[(a_i + 1) % FIELDS.len()];
        let y = format!("Y{a_i:05}");
        edges.push((y.clone(), a.clone()));
        meta.insert(y.clone(), PaperMeta { year: 1990, field: field.into() });
        meta.insert(a.clone(), PaperMeta { year: 1980, field: field.into() });

        for (s, &(lo, hi)) in b_ranges.iter().enumerate() {
            let year = 2000 + s as i32;
            let (b, c) = (format!("B{a_i:05}_{s}"), format!("C{a_i:05}_{s}"));
            let (bad, off, d) = (format!("D{a_i:05}_{s}_a"), format!("D{a_i:05}_{s}_b"), format!("D{a_i:05}_{s}_c"));
            let base = rng.gen_range(3.0..4.0);
            let c_f = base + delta + stratum_shift[s] + noise.sample(&mut rng);
            let d_f = base + noise.sample(&mut rng);

            for (from, to) in [(&b, &a), (&c, &a), (&c, &b), (&bad, &a), (&bad, &y), (&off, &a), (&d, &a)] {
                edges.push((from.clone(), to.clone()));
            }
            records.push(planted_record(&b, &a, 10 + s, rng.gen_range(lo..=hi)));
            records.push(planted_record(&c, &a, s, c_f));
            records.push(planted_record(&bad, &a, s, rng.gen_range(1.0..5.0)));
            records.push(planted_record(&off, &a, s, rng.gen_range(1.0..5.0)));
            records.push(planted_record(&d, &a, s, d_f));
            meta.insert(b, PaperMeta { year: 1995, field: field.into() });
            for id in [c, bad, d] {
                meta.insert(id, PaperMeta { year, field: field.into() });
            }
            meta.insert(off, PaperMeta { year, field: other_field.into() });
        }
    }
    records.sort_by(|x, y| x.sort_key().cmp(&y.sort_key()));
    let graph = CitationGraph::from_edges(edges.iter().map(|(a, b)| (a.as_str(), b.as_str())));
    TelephoneScenario { graph, records, meta }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_seed_deterministic() {
        let a = generate_corpus(40, 7);
        let b = generate_corpus(40, 7);
        assert_eq!(a, b);
        assert_ne!(a, generate_corpus(40, 8));
        assert!(a.iter().any(|p| p.year <= 2000));
        for p in &a {
            for r in p.references.iter().filter_map(|r| r.cited_paper_id.as_ref()) {
                assert!(r < &p.paper_id, "{} cites later paper {r}", p.paper_id);
            }
        }
    }

    #[test]
    fn planted_rows_cover_reference_levels() {
        let p = planted_regression(500, 0.5, 1);
        assert!(p.rows.iter().any(|r| r.field_of_study == "Physics"));
        assert!(p.rows.iter().any(|r| r.publication_year == 2000));
        assert!(p.rows.iter().any(|r| r.publication_type == PublicationType::Other));
    }
}

mod common;

use proptest::prelude::*;

use citefid_core::extract::{
    check_single_source, classify_background, extract_reporting_citations, is_single_source_reporting_candidate,
    parse_markers, BaselineBackgroundClassifier, MarkerStyle, RejectReason,
};
use citefid_core::synth::generate_corpus;

use common::{paper, reporting_examples_paper, REPORTING_EXAMPLES};

#[test]
fn marker_forms() {
    let m = parse_markers("already involved in scientific activity [17].");
    assert_eq!(m.len(), 1);
    assert_eq!((m[0].style, m[0].keys.clone()), (MarkerStyle::NumericBracket, vec!["17".to_string()]));

    let m = parse_markers("or cognitive load (Specht, 2019).");
    assert_eq!((m[0].style, m[0].keys.clone()), (MarkerStyle::AuthorYearParen, vec!["Specht 2019".to_string()]));
    assert_eq!(parse_markers("x (Lee et al. 2020).")[0].keys, ["Lee 2020"]);
    assert_eq!(parse_markers("x (Lee 2020).")[0].keys, ["Lee 2020"]);
    assert_eq!(parse_markers("x (Lee, 2020; Park et al., 2018).")[0].keys, ["Lee 2020", "Park 2018"]);

    assert_eq!(parse_markers("[1-3]")[0].keys, ["1", "2", "3"]);
    assert_eq!(parse_markers("[1, 4]")[0].keys, ["1", "4"]);
    assert_eq!(parse_markers("[2\u{2013}4, 9]")[0].keys, ["2", "3", "4", "9"]);

    let three = parse_markers("examined exaggeration [17], certainty [18], and fact checking [19], among others.");
    assert_eq!(three.len(), 3);
    assert!(parse_markers("values (n = 12) and (see above) [x]").is_empty());
}

#[test]
fn spans_are_character_offsets() {
    let s = "Naïve café results [3].";
    let m = &parse_markers(s)[0];
    let chars: Vec<char> = s.chars().collect();
    assert_eq!(chars[m.span.0..m.span.1].iter().collect::<String>(), "[3]");
}

#[test]
fn single_source_rule() {
    assert!(is_single_source_reporting_candidate(REPORTING_EXAMPLES[0].0).is_some());
    assert_eq!(check_single_source(REPORTING_EXAMPLES[2].0), Err(RejectReason::NotTerminal));
    assert_eq!(check_single_source("Both were shown [17] [18]."), Err(RejectReason::MultipleMarkers));
    assert_eq!(check_single_source("Reviewed before [1-3]."), Err(RejectReason::MultipleKeys));
    assert_eq!(check_single_source("No citation here."), Err(RejectReason::NoMarker));
    assert!(check_single_source("It was \"shown\" [4].\u{201d} ").is_ok());
    assert_eq!(check_single_source("Shown [4]; later."), Err(RejectReason::NotTerminal));
}

#[test]
fn baseline_background_gate() {
    let s = [REPORTING_EXAMPLES[0].0, REPORTING_EXAMPLES[3].0];
    let out = classify_background(&s, &BaselineBackgroundClassifier).unwrap();
    assert_eq!(out, [(true, 1.0), (false, 0.0)]);
    assert!(classify_background(&[], &BaselineBackgroundClassifier).unwrap().is_empty());
    // whole words only
    assert!(!classify_background(&["The showcase [1]."], &BaselineBackgroundClassifier).unwrap()[0].0);
}

#[test]
fn reporting_table_rows() {
    let ex = extract_reporting_citations(&reporting_examples_paper(), &BaselineBackgroundClassifier).unwrap();
    assert_eq!(ex.instances.len(), 1);
    assert_eq!(ex.instances[0].cited_paper_id, "R17");
    assert_eq!(
        ex.rejected,
        [(1, RejectReason::MultipleMarkers), (2, RejectReason::NotTerminal), (3, RejectReason::NotBackground)]
    );
}

/// Hand-labelled fixture: each sentence with the verdict worked out by hand.
const LABELLED: &[(&str, Option<RejectReason>)] = &[
    ("Prior work found that sleep improves recall [1].", None),
    ("Smith showed that dosage matters (Smith, 2010).", None),
    ("It has been reported that rates fall (Smith 2010; Jones 2011).", Some(RejectReason::MultipleKeys)),
    ("We observed effects [2], later confirmed [3].", Some(RejectReason::MultipleMarkers)),
    ("Earlier studies revealed a link [4].", Some(RejectReason::UnresolvedReference)),
    ("Earlier studies revealed a link [9].", Some(RejectReason::UnknownKey)),
    ("This matches earlier work [1].", Some(RejectReason::NotBackground)),
    ("We follow the protocol of [2] in all runs.", Some(RejectReason::NotTerminal)),
    ("Plain sentence with no markers.", None),
    ("Several reviews reported similar findings [1-2].", Some(RejectReason::MultipleKeys)),
    ("A later study demonstrated the opposite [2].", None),
];

#[test]
fn hand_labelled_fixture() {
    let sentences: Vec<&str> = LABELLED.iter().map(|(s, _)| *s).collect();
    let p = paper("P", &sentences, &[("1", Some("Q1")), ("2", Some("Q2")), ("4", None), ("Smith 2010", Some("Q3"))]);
    let ex = extract_reporting_citations(&p, &BaselineBackgroundClassifier).unwrap();
    let got: Vec<(usize, &str)> = ex.instances.iter().map(|i| (i.sentence_index, i.cited_paper_id.as_str())).collect();
    assert_eq!(got, [(0, "Q1"), (1, "Q3"), (10, "Q2")]);
    let mut want_rejected: Vec<(usize, RejectReason)> = LABELLED
        .iter()
        .enumerate()
        .filter_map(|(i, (s, r))| match r {
            Some(r) => Some((i, *r)),
            None if parse_markers(s).is_empty() => Some((i, RejectReason::NoMarker)),
            None => None,
        })
        .collect();
    want_rejected.sort();
    assert_eq!(ex.rejected, want_rejected);
}

#[test]
fn valid_plus_multi_plus_mid_sentence_gives_one_instance() {
    let p = paper(
        "P",
        &["Past work has shown X [1].", "Studies found A [1] and B [2].", "We found [2] useful for parsing."],
        &[("1", Some("A")), ("2", Some("B"))],
    );
    assert_eq!(extract_reporting_citations(&p, &BaselineBackgroundClassifier).unwrap().instances.len(), 1);
    let empty = paper("E", &["Nothing cited."], &[]);
    assert!(extract_reporting_citations(&empty, &BaselineBackgroundClassifier).unwrap().instances.is_empty());
}

#[test]
fn self_reference_is_not_a_citation() {
    let p = paper("P", &["We previously showed this [1]."], &[("1", Some("P"))]);
    let ex = extract_reporting_citations(&p, &BaselineBackgroundClassifier).unwrap();
    assert_eq!(ex.rejected, [(0, RejectReason::UnresolvedReference)]);
}

#[test]
fn every_sentence_is_accounted_for_on_synthetic_corpus() {
    for p in generate_corpus(60, 11) {
        let ex = extract_reporting_citations(&p, &BaselineBackgroundClassifier).unwrap();
        let mut idx: Vec<usize> =
            ex.instances.iter().map(|i| i.sentence_index).chain(ex.rejected.iter().map(|r| r.0)).collect();
        idx.sort_unstable();
        assert_eq!(idx, (0..p.body_sentences.len()).collect::<Vec<_>>());
        for inst in &ex.instances {
            let m = is_single_source_reporting_candidate(&inst.sentence_text).expect("emitted instance passes rule");
            assert_eq!(m, inst.marker);
            assert!(inst.is_background && inst.background_confidence >= 0.5);
        }
    }
}

#[test]
fn extraction_is_worker_count_invariant() {
    use rayon::prelude::*;
    let papers = generate_corpus(80, 12);
    let run = |n| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
        pool.install(|| {
            papers
                .par_iter()
                .map(|p| {
                    let ex = extract_reporting_citations(p, &BaselineBackgroundClassifier).unwrap();
                    (ex.instances, ex.rejected)
                })
                .collect::<Vec<_>>()
        })
    };
    assert_eq!(run(1), run(8));
}

fn sentence_with_markers() -> impl Strategy<Value = String> {
    let piece = prop::sample::select(vec![
        "results",
        "Naïve",
        "(Lee 2020)",
        "(Lee et al., 2019)",
        "[3]",
        "[1-4]",
        "[2, 5]",
        "(n=3)",
        "(",
        ")",
        "[",
        "]",
        ",",
        ".",
        "café",
        "(Kim & Park 2001)",
    ]);
    prop::collection::vec(piece, 1..20).prop_map(|v| v.join(" "))
}

proptest! {
    #[test]
    fn spans_are_ordered_disjoint_and_inside(s in sentence_with_markers()) {
        let n = s.chars().count();
        let markers = parse_markers(&s);
        for w in markers.windows(2) {
            prop_assert!(w[0].span.1 <= w[1].span.0);
        }
        for m in &markers {
            prop_assert!(m.span.0 < m.span.1 && m.span.1 <= n);
            prop_assert!(!m.keys.is_empty());
        }
    }

    #[test]
    fn candidates_satisfy_the_rule(s in sentence_with_markers()) {
        if let Some(m) = is_single_source_reporting_candidate(&s) {
            prop_assert_eq!(parse_markers(&s).len(), 1);
            prop_assert_eq!(m.keys.len(), 1);
            let tail_ok = s.chars().skip(m.span.1).all(|c| ".!?\"'\u{201d}\u{2019}\u{bb}".contains(c) || c.is_whitespace());
            prop_assert!(tail_ok);
        }
    }
}

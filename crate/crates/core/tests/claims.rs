mod common;

use proptest::prelude::*;

use citefid_core::claims::{
    classify_discourse, select_claims, BaselineDiscourseClassifier, DiscourseCategory, DEFAULT_BACKGROUND_CONFIDENCE,
};
use citefid_core::synth::generate_corpus;

use common::paper;
use DiscourseCategory::*;

/// Sentences labelled by hand against the cue lexicon and its precedence.
const LABELLED: &[(&str, DiscourseCategory)] = &[
    ("In conclusion, treatment reduced symptoms.", Conclusions),
    ("We conclude that the effect is robust.", Conclusions),
    ("These findings suggest a causal role for sleep.", Conclusions),
    ("Overall, the intervention was cost effective.", Conclusions),
    ("OVERALL the picture is mixed.", Conclusions),
    ("Overall, we find that the effect significantly increased.", Conclusions),
    ("We find that yields rose by 12%.", Results),
    ("Our results show a strong seasonal pattern.", Results),
    ("Exposure was associated with lower scores.", Results),
    ("Mortality fell significantly after the reform.", Results),
    ("We find that participants we recruited improved.", Results),
    ("Results show the method was measured accurately.", Results),
    ("We recruited 40 participants using flyers.", Methods),
    ("Blood pressure was measured twice daily.", Methods),
    ("We used a mixed-effects model.", Methods),
    ("We used interviews; we aim to extend them.", Methods),
    ("We aim to quantify citation drift.", Objective),
    ("The goal of this study is to map erosion.", Objective),
    ("Sleep is important for memory.", Background),
    ("Many studies examine this question.", Background),
    ("Overallocation of memory is common.", Background),
    ("A significantly-designed trial is rare.", Results),
    ("Insignificantly small effects were ignored.", Background),
    ("The recruitedness of samples varies.", Background),
    ("We usedto think otherwise.", Background),
    ("Findings vary widely across fields.", Background),
    ("", Background),
    ("Prior work [3] examined exaggeration.", Background),
    ("In conclusion.", Conclusions),
    ("We found nothing, overall.", Conclusions),
];

#[test]
fn hand_labelled_sentences() {
    let texts: Vec<&str> = LABELLED.iter().map(|(s, _)| *s).collect();
    let out = classify_discourse(&texts, &BaselineDiscourseClassifier).unwrap();
    for ((s, want), (got, conf)) in LABELLED.iter().zip(&out) {
        assert_eq!(got, want, "{s:?}");
        let want_conf = if *want == Background { DEFAULT_BACKGROUND_CONFIDENCE } else { 1.0 };
        assert_eq!(*conf, want_conf, "{s:?}");
    }
    assert!(classify_discourse(&[], &BaselineDiscourseClassifier).unwrap().is_empty());
}

#[test]
fn ten_sentence_fixture_has_three_claims() {
    let sentences = [
        "Coastal erosion is a growing concern.",
        "We aim to measure it at scale.",
        "We used satellite imagery from 1990 to 2020.",
        "Shoreline position was measured annually.",
        "We find that retreat accelerated after 2005.",
        "Sandy beaches are common in the region.",
        "Retreat was associated with storm frequency.",
        "Prior surveys were sparse.",
        "In conclusion, monitoring should continue.",
        "Funding came from a public grant.",
    ];
    let p = paper("P", &sentences, &[]);
    let claims = select_claims(&p, &BaselineDiscourseClassifier).unwrap();
    let got: Vec<(usize, DiscourseCategory)> = claims.iter().map(|c| (c.sentence_index, c.category)).collect();
    assert_eq!(got, [(4, Results), (6, Results), (8, Conclusions)]);
    for c in &claims {
        assert_eq!(c.sentence_text, sentences[c.sentence_index]);
        assert_eq!(c.paper_id, "P");
    }
    let methods = paper("M", &["We used a scale.", "Weight was measured."], &[]);
    assert!(select_claims(&methods, &BaselineDiscourseClassifier).unwrap().is_empty());
}

#[test]
fn synthetic_corpus_keeps_about_thirty_percent() {
    let papers = generate_corpus(200, 42);
    let (mut kept, mut total) = (0usize, 0usize);
    for p in &papers {
        kept += select_claims(p, &BaselineDiscourseClassifier).unwrap().len();
        total += p.body_sentences.len();
    }
    let frac = kept as f64 / total as f64;
    assert!((0.2..=0.4).contains(&frac), "retained fraction {frac}");
}

fn words() -> impl Strategy<Value = Vec<String>> {
    let w = prop::sample::select(vec![
        "we",
        "find",
        "results",
        "show",
        "overall",
        "recruited",
        "the",
        "goal",
        "of",
        "in",
        "conclusion",
        "data",
        "significantly",
        "used",
        "aim",
        "cells",
    ]);
    prop::collection::vec(prop::collection::vec(w, 0..10).prop_map(|v| v.join(" ")), 0..15)
}

proptest! {
    #[test]
    fn claims_are_exactly_the_claim_labelled_sentences(sentences in words()) {
        let refs: Vec<&str> = sentences.iter().map(String::as_str).collect();
        let p = paper("P", &refs, &[]);
        let labels = classify_discourse(&refs, &BaselineDiscourseClassifier).unwrap();
        let claims = select_claims(&p, &BaselineDiscourseClassifier).unwrap();
        let want: Vec<usize> = labels.iter().enumerate().filter(|(_, (c, _))| c.is_claim()).map(|(i, _)| i).collect();
        let got: Vec<usize> = claims.iter().map(|c| c.sentence_index).collect();
        prop_assert_eq!(got, want);
    }
}

mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use citefid_core::analysis::{
    bin_continuous, encode_design_matrix, fit_ols, stars, summarize, AnalysisError, DesignMatrix, RegressionSpec,
    Variable,
};
use citefid_core::synth::planted_regression;

use common::normal_equations;

fn random_system(rng: &mut ChaCha8Rng, n: usize, k: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let x: Vec<Vec<f64>> =
        (0..n).map(|_| std::iter::once(1.0).chain((1..k).map(|_| rng.gen_range(-3.0..3.0))).collect()).collect();
    let y = x.iter().map(|r| r.iter().sum::<f64>() + rng.gen_range(-1.0..1.0)).collect();
    (x, y)
}

fn matrix(x: &[Vec<f64>], y: &[f64]) -> DesignMatrix {
    DesignMatrix::new((0..x[0].len()).map(|j| format!("x{j}")).collect(), x.to_vec(), y.to_vec())
}

#[test]
fn fit_matches_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let (x, y) = random_system(&mut rng, 60, 4);
        let fit = fit_ols(&matrix(&x, &y)).unwrap();
        for (a, b) in fit.estimates().iter().zip(normal_equations(&x, &y)) {
            assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "{a} vs {b}");
        }
    }
}

#[test]
fn textbook_line() {
    // y = 1 + 2x exactly except one point; hand-computed fit
    let x: Vec<Vec<f64>> = [0.0, 1.0, 2.0, 3.0].iter().map(|&v| vec![1.0, v]).collect();
    let y = [1.0, 3.0, 5.0, 8.0];
    let fit = fit_ols(&matrix(&x, &y)).unwrap();
    // slope = Sxy/Sxx = 11.5/5 = 2.3, intercept = 4.25 - 2.3*1.5 = 0.8
    assert!((fit.coefficients[1].estimate - 2.3).abs() < 1e-12);
    assert!((fit.coefficients[0].estimate - 0.8).abs() < 1e-12);
    // residuals 0.2, -0.1, -0.4, 0.3 → RSS 0.3
    assert!((fit.rss - 0.3).abs() < 1e-12);
    assert_eq!(fit.residual_df, 2);
    // se(slope) = sqrt(0.15/5)
    assert!((fit.coefficients[1].std_error - (0.15f64 / 5.0).sqrt()).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn affine_response_transform_maps_coefficients(seed in 0u64..1000, a in -5.0f64..5.0, b in 0.2f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = random_system(&mut rng, 40, 3);
        let base = fit_ols(&matrix(&x, &y)).unwrap();
        let y2: Vec<f64> = y.iter().map(|v| a + b * v).collect();
        let fit = fit_ols(&matrix(&x, &y2)).unwrap();
        let want0 = a + b * base.coefficients[0].estimate;
        prop_assert!((fit.coefficients[0].estimate - want0).abs() <= 1e-8 * want0.abs().max(1.0));
        for j in 1..3 {
            let w = b * base.coefficients[j].estimate;
            prop_assert!((fit.coefficients[j].estimate - w).abs() <= 1e-8 * w.abs().max(1.0));
            // t statistics are invariant to response scaling
            prop_assert!((fit.coefficients[j].t_value - base.coefficients[j].t_value).abs() <= 1e-6 * base.coefficients[j].t_value.abs().max(1.0));
        }
    }

    #[test]
    fn residuals_are_orthogonal_to_columns(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = random_system(&mut rng, 50, 5);
        let m = matrix(&x, &y);
        let fit = fit_ols(&m).unwrap();
        let pred = fit.predict(&m);
        for j in 0..5 {
            let dot: f64 = (0..50).map(|i| x[i][j] * (y[i] - pred[i])).sum();
            prop_assert!(dot.abs() <= 1e-9);
        }
    }

    #[test]
    fn p_values_fall_as_t_grows(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = random_system(&mut rng, 30, 6);
        let fit = fit_ols(&matrix(&x, &y)).unwrap();
        let mut c = fit.coefficients.clone();
        c.sort_by(|a, b| a.t_value.abs().total_cmp(&b.t_value.abs()));
        for w in c.windows(2) {
            prop_assert!(w[0].p_value >= w[1].p_value);
        }
        prop_assert!(c.iter().all(|k| (0.0..=1.0).contains(&k.p_value)));
    }
}

#[test]
fn stars_thresholds() {
    assert_eq!(stars(0.0005), "***");
    assert_eq!(stars(0.001), "**");
    assert_eq!(stars(0.009), "**");
    assert_eq!(stars(0.01), "*");
    assert_eq!(stars(0.049), "*");
    assert_eq!(stars(0.05), "");
}

#[test]
fn error_shrinks_with_noise() {
    let spec = RegressionSpec::main();
    let mut errs = Vec::new();
    for sigma in [0.5, 0.05, 0.005] {
        let planted = planted_regression(4000, sigma, 77);
        let enc = encode_design_matrix(&planted.rows, &spec).unwrap();
        let fit = fit_ols(&enc.matrix).unwrap();
        let mut worst: f64 = 0.0;
        for (name, truth) in &planted.truth {
            let c = fit.coefficient(name).unwrap();
            assert!((c.estimate - truth).abs() < 4.0 * c.std_error, "{name} at sigma {sigma}");
            worst = worst.max((c.estimate - truth).abs());
        }
        errs.push(worst);
    }
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
}

#[test]
fn reference_row_is_intercept_only() {
    let mut rows = planted_regression(500, 0.5, 3).rows;
    let mut r = rows[0].clone();
    r.field_of_study = "Physics".into();
    r.publication_year = 2000;
    r.publication_type = citefid_core::PublicationType::Other;
    r.open_access = false;
    r.self_citation = false;
    r.within_field = false;
    rows.insert(0, r);
    let enc = encode_design_matrix(&rows, &RegressionSpec::main()).unwrap();
    let m = &enc.matrix;
    for (j, name) in m.columns.iter().enumerate() {
        let v = m.get(0, j);
        if name == "Intercept" {
            assert_eq!(v, 1.0);
        } else if name.contains('[') || ["Open.Access", "Self.Citation", "Within.Field"].contains(&name.as_str()) {
            assert_eq!(v, 0.0, "{name}");
        }
    }
    assert!(m.column_index("Field.of.Study[Physics]").is_none());
    assert!(m.column_index("Publication.Year[2000]").is_none());
    assert!(m.column_index("Publication.Type[other]").is_none());
}

#[test]
fn missing_reference_level_is_an_error() {
    let rows: Vec<_> =
        planted_regression(300, 0.5, 4).rows.into_iter().filter(|r| r.field_of_study != "Physics").collect();
    let err = encode_design_matrix(&rows, &RegressionSpec::main()).unwrap_err();
    assert!(matches!(err, AnalysisError::MissingReference { .. }), "{err}");
}

#[test]
fn bins_agree_with_group_by() {
    let rows = planted_regression(1500, 0.5, 8).rows;
    for v in [Variable::ContextLength, Variable::PublicationInterval, Variable::PaperCitation] {
        let bins = bin_continuous(&rows, v, 7).unwrap();
        assert_eq!(bins.len(), 7);
        let vals: Vec<(f64, f64)> = rows.iter().map(|r| (v.value(r).unwrap(), r.fidelity)).collect();
        let (min, max) = vals.iter().fold((f64::MAX, f64::MIN), |(lo, hi), (x, _)| (lo.min(*x), hi.max(*x)));
        let width = (max - min) / 7.0;
        let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for (x, f) in &vals {
            let k = (((x - min) / width).floor() as usize).min(6);
            // values within rounding of an inner edge belong to the upper bin
            let k = if k < 6 && *x >= min + width * (k + 1) as f64 { k + 1 } else { k };
            groups.entry(k).or_default().push(*f);
        }
        assert_eq!(bins.iter().map(|b| b.count).sum::<usize>(), rows.len());
        for (k, b) in bins.iter().enumerate() {
            assert!((b.lo - (min + width * k as f64)).abs() < 1e-9 * max.abs().max(1.0));
            let g = groups.get(&k).cloned().unwrap_or_default();
            assert_eq!(b.count, g.len(), "{} bin {k}", v.name());
            match b.mean_fidelity {
                Some(m) => assert!((m - g.iter().sum::<f64>() / g.len() as f64).abs() < 1e-12),
                None => assert!(g.is_empty()),
            }
        }
        assert_eq!(bins.last().unwrap().hi, max);
    }
    assert!(matches!(bin_continuous(&rows, Variable::OpenAccess, 5), Err(AnalysisError::NotContinuous(_))));
    assert!(matches!(bin_continuous(&rows, Variable::ContextLength, 1), Err(AnalysisError::TooFewBins(1))));
    assert!(matches!(bin_continuous(&[], Variable::ContextLength, 3), Err(AnalysisError::EmptyInput)));
}

#[test]
fn summary_is_deterministic_and_complete() {
    let planted = planted_regression(800, 0.5, 9);
    let spec = RegressionSpec::main();
    let a = summarize(&fit_ols(&encode_design_matrix(&planted.rows, &spec).unwrap().matrix).unwrap());
    let b = summarize(&fit_ols(&encode_design_matrix(&planted.rows, &spec).unwrap().matrix).unwrap());
    assert_eq!(a, b);
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines[0], "variable\tcoefficient\tstd_error\tt\tp\tstars");
    assert_eq!(lines.len(), 1 + planted.truth.len());
    assert!(lines[1].starts_with("Intercept\t"));
    assert!(lines[1..].iter().all(|l| l.split('\t').count() == 6));
}

#[test]
fn singular_and_underdetermined_designs_are_rejected() {
    let x: Vec<Vec<f64>> = (0..10).map(|i| vec![1.0, i as f64, 2.0 * i as f64]).collect();
    let y: Vec<f64> = (0..10).map(|i| i as f64).collect();
    assert!(matches!(fit_ols(&matrix(&x, &y)), Err(AnalysisError::Singular(_))));
    let x: Vec<Vec<f64>> = (0..3).map(|i| vec![1.0, i as f64, (i * i) as f64]).collect();
    assert!(matches!(
        fit_ols(&matrix(&x, &[1.0, 2.0, 4.0])),
        Err(AnalysisError::InsufficientData { rows: 3, columns: 3 })
    ));
}

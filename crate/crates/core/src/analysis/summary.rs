use std::fmt::Write;

use super::FitResult;

/// Significance marker: `***` p<0.001, `**` p<0.01, `*` p<0.05.
pub fn stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

/// Coefficient table as TSV, one row per design column, six decimals.
pub fn summarize(fit: &FitResult) -> String {
    let mut out = String::from("variable\tcoefficient\tstd_error\tt\tp\tstars\n");
    for c in &fit.coefficients {
        writeln!(
            out,
            "{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{}",
            c.name,
            c.estimate,
            c.std_error,
            c.t_value,
            c.p_value,
            stars(c.p_value)
        )
        .unwrap();
    }
    out
}

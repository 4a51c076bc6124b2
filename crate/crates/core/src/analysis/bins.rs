use serde::{Deserialize, Serialize};

use super::{AnalysisError, FeatureRow, VarKind, Variable};

/// One equal-width bin. Covers `[lo, hi)`, except the last which is `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub label: String,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    /// `None` for empty bins.
    pub mean_fidelity: Option<f64>,
}

fn edges(min: f64, max: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|b| if b == n { max } else { min + (max - min) * b as f64 / n as f64 }).collect()
}

/// Groups rows into `n_bins` equal-width bins over the observed range of a
/// continuous variable and reports the mean fidelity per bin. Rows missing
/// the variable are left out. The lowest bin is the reference bin in plots.
pub fn bin_continuous(rows: &[FeatureRow], variable: Variable, n_bins: usize) -> Result<Vec<Bin>, AnalysisError> {
    if variable.kind() != VarKind::Continuous {
        return Err(AnalysisError::NotContinuous(variable.name().into()));
    }
    if n_bins < 2 {
        return Err(AnalysisError::TooFewBins(n_bins));
    }
    let points: Vec<(f64, f64)> = rows.iter().filter_map(|r| variable.value(r).map(|v| (v, r.fidelity))).collect();
    if points.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    let min = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let max = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return Err(AnalysisError::DegenerateBins { variable: variable.name().into(), value: min });
    }
    let e = edges(min, max, n_bins);
    let mut sums = vec![0.0; n_bins];
    let mut counts = vec![0usize; n_bins];
    for &(v, f) in &points {
        // first edge strictly above v, minus one; the maximum lands in the last bin
        let b = e[1..n_bins].partition_point(|&edge| edge <= v);
        sums[b] += f;
        counts[b] += 1;
    }
    Ok((0..n_bins)
        .map(|b| {
            let close = if b + 1 == n_bins { ']' } else { ')' };
            Bin {
                label: format!("[{}, {}{close}", fmt_edge(e[b]), fmt_edge(e[b + 1])),
                lo: e[b],
                hi: e[b + 1],
                count: counts[b],
                mean_fidelity: (counts[b] > 0).then(|| sums[b] / counts[b] as f64),
            }
        })
        .collect())
}

fn fmt_edge(x: f64) -> String {
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

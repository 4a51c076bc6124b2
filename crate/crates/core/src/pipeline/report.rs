use std::fmt::Write;

use crate::fidelity::FidelityScore;

pub const HISTOGRAM_BINS: usize = 40;

/// Lower edge of histogram bin `k`: 1.0, 1.1, ..., 4.9, and 5.0 as the
/// upper edge of the last bin.
pub fn histogram_edge(k: usize) -> f64 {
    (10 + k) as f64 / 10.0
}

/// Counts of scores in 0.1-wide bins over [1, 5]. Bin `k` holds
/// `edge(k) <= x < edge(k+1)`; the last bin also holds 5.0.
pub fn fidelity_histogram(scores: &[f64]) -> Vec<usize> {
    let inner: Vec<f64> = (1..HISTOGRAM_BINS).map(histogram_edge).collect();
    let mut counts = vec![0usize; HISTOGRAM_BINS];
    for &x in scores {
        debug_assert!((FidelityScore::MIN..=FidelityScore::MAX).contains(&x));
        counts[inner.partition_point(|&e| e <= x)] += 1;
    }
    counts
}

pub fn histogram_tsv(counts: &[usize]) -> String {
    let mut out = String::from("bin_start\tbin_end\tcount\n");
    for (k, c) in counts.iter().enumerate() {
        writeln!(out, "{:.1}\t{:.1}\t{c}", histogram_edge(k), histogram_edge(k + 1)).unwrap();
    }
    out
}

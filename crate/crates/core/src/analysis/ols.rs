use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use super::{AnalysisError, DesignMatrix};

/// Relative column norm below which a column is treated as a linear
/// combination of the columns before it.
const RANK_TOL: f64 = 1e-9;

/// Above this many residual degrees of freedom the t distribution is
/// replaced by the standard normal.
const NORMAL_APPROX_DF: f64 = 1e6;

/// Householder QR of a design matrix (and the response alongside it).
pub(crate) struct QrFactor {
    /// Upper-triangular factor over the independent columns, row-major r×r.
    pub r: Vec<Vec<f64>>,
    /// First r entries of Qᵀy.
    pub qty: Vec<f64>,
    /// Dependent columns with their coefficients on independent columns.
    pub dependent: Vec<(usize, Vec<(usize, f64)>)>,
}

pub(crate) fn householder_qr(m: &DesignMatrix) -> QrFactor {
    let (n, k) = (m.n_rows(), m.n_cols());
    let mut cols: Vec<Vec<f64>> = (0..k).map(|j| (0..n).map(|i| m.get(i, j)).collect()).collect();
    let norms: Vec<f64> = cols.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    let mut y = m.response.clone();
    let mut independent = Vec::new();
    let mut dependent_raw = Vec::new();
    let mut rank = 0usize;

    for j in 0..k {
        let tail_norm = cols[j][rank..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if rank >= n || tail_norm <= RANK_TOL * norms[j].max(f64::MIN_POSITIVE) {
            dependent_raw.push(j);
            continue;
        }
        let x0 = cols[j][rank];
        let alpha = if x0 >= 0.0 { -tail_norm } else { tail_norm };
        let mut v: Vec<f64> = cols[j][rank..].to_vec();
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        let beta = 2.0 / vtv;
        let reflect = |c: &mut [f64]| {
            let dot: f64 = v.iter().zip(c.iter()).map(|(a, b)| a * b).sum();
            let s = beta * dot;
            for (ci, vi) in c.iter_mut().zip(&v) {
                *ci -= s * vi;
            }
        };
        for col in cols.iter_mut().skip(j) {
            reflect(&mut col[rank..]);
        }
        reflect(&mut y[rank..]);
        independent.push(j);
        rank += 1;
    }

    let r: Vec<Vec<f64>> = (0..rank).map(|i| independent.iter().map(|&j| cols[j][i]).collect()).collect();
    let dependent = dependent_raw
        .into_iter()
        .map(|j| {
            let mut rhs: Vec<f64> = (0..rank).map(|i| cols[j][i]).collect();
            // rows at or below the rank reached when column j was examined are ~0
            back_substitute(&r, &mut rhs);
            let combo =
                rhs.into_iter().enumerate().filter(|(_, c)| c.abs() > 1e-8).map(|(i, c)| (independent[i], c)).collect();
            (j, combo)
        })
        .collect();
    QrFactor { r, qty: y[..rank].to_vec(), dependent }
}

/// Solves R x = b in place for upper-triangular R.
fn back_substitute(r: &[Vec<f64>], b: &mut [f64]) {
    for i in (0..b.len()).rev() {
        let mut s = b[i];
        for j in i + 1..b.len() {
            s -= r[i][j] * b[j];
        }
        b[i] = s / r[i][i];
    }
}

pub(crate) fn singular_message(m: &DesignMatrix, qr: &QrFactor) -> Option<String> {
    if qr.dependent.is_empty() {
        return None;
    }
    let parts: Vec<String> = qr
        .dependent
        .iter()
        .map(|(j, combo)| {
            if combo.is_empty() {
                format!("column `{}` is identically zero", m.columns[*j])
            } else {
                let names: Vec<&str> = combo.iter().map(|(i, _)| m.columns[*i].as_str()).collect();
                format!("column `{}` is collinear with {}", m.columns[*j], names.join(", "))
            }
        })
        .collect();
    Some(parts.join("; "))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t_value: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// In design-matrix column order, intercept first.
    pub coefficients: Vec<Coefficient>,
    pub r_squared: f64,
    pub adjusted_r_squared: f64,
    pub n_observations: usize,
    pub residual_df: usize,
    pub rss: f64,
}

impl FitResult {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }

    pub fn estimates(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.estimate).collect()
    }

    pub fn predict(&self, m: &DesignMatrix) -> Vec<f64> {
        let beta = self.estimates();
        (0..m.n_rows()).map(|i| m.row(i).iter().zip(&beta).map(|(x, b)| x * b).sum()).collect()
    }
}

fn two_sided_p(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return 1.0;
    }
    let tail = if df > NORMAL_APPROX_DF {
        Normal::standard().sf(t.abs())
    } else {
        StudentsT::new(0.0, 1.0, df).expect("df > 0").sf(t.abs())
    };
    (2.0 * tail).clamp(0.0, 1.0)
}

/// Ordinary least squares with classical standard errors
/// `σ̂²·diag((XᵀX)⁻¹)`, `σ̂² = RSS/(n−k)`.
pub fn fit_ols(m: &DesignMatrix) -> Result<FitResult, AnalysisError> {
    let (n, k) = (m.n_rows(), m.n_cols());
    if n <= k {
        return Err(AnalysisError::InsufficientData { rows: n, columns: k });
    }
    let qr = householder_qr(m);
    if let Some(msg) = singular_message(m, &qr) {
        return Err(AnalysisError::Singular(msg));
    }

    let mut beta = qr.qty.clone();
    back_substitute(&qr.r, &mut beta);

    let fitted: Vec<f64> = (0..n).map(|i| m.row(i).iter().zip(&beta).map(|(x, b)| x * b).sum()).collect();
    let rss: f64 = m.response.iter().zip(&fitted).map(|(y, f)| (y - f).powi(2)).sum();
    let mean = m.response.iter().sum::<f64>() / n as f64;
    let tss: f64 = m.response.iter().map(|y| (y - mean).powi(2)).sum();
    let df = n - k;
    let sigma2 = rss / df as f64;

    // diag((XᵀX)⁻¹) = row sums of squares of R⁻¹
    let mut rinv = vec![vec![0.0; k]; k];
    for c in 0..k {
        let mut e = vec![0.0; k];
        e[c] = 1.0;
        back_substitute(&qr.r, &mut e);
        for (row, v) in rinv.iter_mut().zip(e) {
            row[c] = v;
        }
    }

    let coefficients = (0..k)
        .map(|j| {
            let var = sigma2 * rinv[j].iter().map(|v| v * v).sum::<f64>();
            let se = var.sqrt();
            let t = if se > 0.0 {
                beta[j] / se
            } else if beta[j] == 0.0 {
                0.0
            } else {
                beta[j].signum() * f64::INFINITY
            };
            Coefficient {
                name: m.columns[j].clone(),
                estimate: beta[j],
                std_error: se,
                t_value: t,
                p_value: two_sided_p(t, df as f64),
            }
        })
        .collect();

    let r_squared = if tss > 0.0 { (1.0 - rss / tss).clamp(0.0, 1.0) } else { 1.0 };
    let adjusted_r_squared = 1.0 - (1.0 - r_squared) * (n as f64 - 1.0) / df as f64;
    Ok(FitResult { coefficients, r_squared, adjusted_r_squared, n_observations: n, residual_df: df, rss })
}

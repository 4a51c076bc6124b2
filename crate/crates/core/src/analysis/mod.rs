//! Regression of citation fidelity on proximity, team and accessibility
//! factors.
//!
//! Flow: [`derive_features`] turns a scored pair plus its two papers into a
//! [`FeatureRow`]; [`encode_design_matrix`] dummy-codes rows against a
//! [`RegressionSpec`]; [`fit_ols`] solves by Householder QR and reports
//! classical standard errors; [`summarize`] renders the coefficient table.

mod bins;
mod design;
mod features;
mod ols;
mod spec;
mod summary;

use thiserror::Error;

pub use bins::{bin_continuous, Bin};
pub use design::{encode_design_matrix, DesignMatrix, Encoded};
pub use features::{derive_features, FeatureRow};
pub use ols::{fit_ols, Coefficient, FitResult};
pub use spec::{RegressionSpec, VarKind, Variable};
pub use summary::{stars, summarize};

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("singular design: {0}")]
    Singular(String),
    #[error("insufficient data: {rows} usable rows for {columns} columns")]
    InsufficientData { rows: usize, columns: usize },
    #[error("level `{level}` of {variable} is not in the level registry")]
    UnknownLevel { variable: String, level: String },
    #[error("reference level `{level}` of {variable} does not occur in the data")]
    MissingReference { variable: String, level: String },
    #[error("{0} is not a continuous variable")]
    NotContinuous(String),
    #[error("{variable} is constant ({value}); cannot form bins")]
    DegenerateBins { variable: String, value: f64 },
    #[error("need at least 2 bins, got {0}")]
    TooFewBins(usize),
    #[error("no rows")]
    EmptyInput,
    #[error("regression spec, line {line}: {message}")]
    SpecParse { line: usize, message: String },
}

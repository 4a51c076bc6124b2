use std::collections::{BTreeMap, BTreeSet};

use super::ols::{householder_qr, singular_message};
use super::{AnalysisError, FeatureRow, RegressionSpec, VarKind, Variable};

/// Dense design matrix, row-major, intercept in column 0.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub columns: Vec<String>,
    data: Vec<f64>,
    pub response: Vec<f64>,
}

impl DesignMatrix {
    pub fn new(columns: Vec<String>, rows: Vec<Vec<f64>>, response: Vec<f64>) -> Self {
        assert_eq!(rows.len(), response.len(), "row/response length mismatch");
        let k = columns.len();
        let mut data = Vec::with_capacity(rows.len() * k);
        for r in rows {
            assert_eq!(r.len(), k, "row width does not match column count");
            data.extend(r);
        }
        DesignMatrix { columns, data, response }
    }

    pub fn n_rows(&self) -> usize {
        self.response.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.columns.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let k = self.columns.len();
        &self.data[i * k..(i + 1) * k]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

#[derive(Debug, Clone)]
pub struct Encoded {
    pub matrix: DesignMatrix,
    /// Rows dropped because a predictor value was missing.
    pub excluded_missing: usize,
}

fn sort_levels(levels: &mut [String]) {
    if levels.iter().all(|l| l.parse::<i64>().is_ok()) {
        levels.sort_by_key(|l| l.parse::<i64>().unwrap());
    } else {
        levels.sort();
    }
}

fn bool_level(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

/// Dummy-codes categorical predictors against their reference levels,
/// booleans as 0/1 (1 = the non-reference value), continuous values as is.
/// Column names are `Variable` or `Variable[level]`.
pub fn encode_design_matrix(rows: &[FeatureRow], spec: &RegressionSpec) -> Result<Encoded, AnalysisError> {
    let usable: Vec<&FeatureRow> = rows.iter().filter(|r| spec.predictors.iter().all(|v| v.present(r))).collect();
    let excluded_missing = rows.len() - usable.len();
    if usable.len() < 2 {
        return Err(AnalysisError::InsufficientData { rows: usable.len(), columns: 0 });
    }

    let mut levels: BTreeMap<Variable, Vec<String>> = BTreeMap::new();
    for &v in spec.predictors.iter().filter(|v| v.kind() == VarKind::Categorical) {
        let observed: BTreeSet<String> = usable.iter().filter_map(|r| v.level(r)).collect();
        let reference = spec.reference(v);
        let mut lv = match spec.levels.get(&v) {
            Some(registry) => {
                if let Some(bad) = observed.iter().find(|l| !registry.contains(l)) {
                    return Err(AnalysisError::UnknownLevel { variable: v.name().into(), level: bad.clone() });
                }
                registry.clone()
            }
            None => observed.iter().cloned().collect(),
        };
        if !observed.contains(reference) {
            return Err(AnalysisError::MissingReference { variable: v.name().into(), level: reference.into() });
        }
        sort_levels(&mut lv);
        lv.retain(|l| l != reference);
        levels.insert(v, lv);
    }

    let mut columns = vec!["Intercept".to_string()];
    for &v in &spec.predictors {
        match v.kind() {
            VarKind::Categorical => columns.extend(levels[&v].iter().map(|l| format!("{}[{l}]", v.name()))),
            _ => columns.push(v.name().to_string()),
        }
    }

    let mut data = Vec::with_capacity(usable.len());
    for r in &usable {
        let mut row = Vec::with_capacity(columns.len());
        row.push(1.0);
        for &v in &spec.predictors {
            match v.kind() {
                VarKind::Categorical => {
                    let own = v.level(r).unwrap();
                    row.extend(levels[&v].iter().map(|l| if *l == own { 1.0 } else { 0.0 }));
                }
                VarKind::Boolean => {
                    let flag = v.flag(r).unwrap();
                    row.push(if bool_level(flag) == spec.reference(v) { 0.0 } else { 1.0 });
                }
                VarKind::Continuous => row.push(v.value(r).unwrap()),
            }
        }
        data.push(row);
    }
    let response = usable.iter().map(|r| r.fidelity).collect();
    let matrix = DesignMatrix::new(columns, data, response);

    let qr = householder_qr(&matrix);
    if let Some(msg) = singular_message(&matrix, &qr) {
        return Err(AnalysisError::Singular(msg));
    }
    Ok(Encoded { matrix, excluded_missing })
}

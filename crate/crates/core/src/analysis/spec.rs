use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::{AnalysisError, FeatureRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variable {
    FieldOfStudy,
    PublicationYear,
    PublicationType,
    OpenAccess,
    ContextLength,
    ReferenceFrequency,
    PublicationInterval,
    PaperCitation,
    AuthorSeniority,
    TeamSize,
    SelfCitation,
    WithinField,
    FirstAuthorSeniority,
    LastAuthorSeniority,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Categorical,
    Boolean,
    Continuous,
}

impl Variable {
    pub const ALL: [Variable; 14] = [
        Variable::FieldOfStudy,
        Variable::PublicationYear,
        Variable::PublicationType,
        Variable::OpenAccess,
        Variable::ContextLength,
        Variable::ReferenceFrequency,
        Variable::PublicationInterval,
        Variable::PaperCitation,
        Variable::AuthorSeniority,
        Variable::TeamSize,
        Variable::SelfCitation,
        Variable::WithinField,
        Variable::FirstAuthorSeniority,
        Variable::LastAuthorSeniority,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variable::FieldOfStudy => "Field.of.Study",
            Variable::PublicationYear => "Publication.Year",
            Variable::PublicationType => "Publication.Type",
            Variable::OpenAccess => "Open.Access",
            Variable::ContextLength => "Context.Length",
            Variable::ReferenceFrequency => "Reference.Frequency",
            Variable::PublicationInterval => "Publication.Interval",
            Variable::PaperCitation => "Paper.Citation",
            Variable::AuthorSeniority => "Author.Seniority",
            Variable::TeamSize => "Team.Size",
            Variable::SelfCitation => "Self.Citation",
            Variable::WithinField => "Within.Field",
            Variable::FirstAuthorSeniority => "First.Author.Seniority",
            Variable::LastAuthorSeniority => "Last.Author.Seniority",
        }
    }

    pub fn kind(self) -> VarKind {
        match self {
            Variable::FieldOfStudy | Variable::PublicationYear | Variable::PublicationType => VarKind::Categorical,
            Variable::OpenAccess | Variable::SelfCitation | Variable::WithinField => VarKind::Boolean,
            _ => VarKind::Continuous,
        }
    }

    /// Level label for categorical variables.
    pub fn level(self, row: &FeatureRow) -> Option<String> {
        match self {
            Variable::FieldOfStudy => Some(row.field_of_study.clone()),
            Variable::PublicationYear => Some(row.publication_year.to_string()),
            Variable::PublicationType => Some(row.publication_type.as_str().to_string()),
            _ => None,
        }
    }

    pub fn flag(self, row: &FeatureRow) -> Option<bool> {
        match self {
            Variable::OpenAccess => Some(row.open_access),
            Variable::SelfCitation => Some(row.self_citation),
            Variable::WithinField => Some(row.within_field),
            _ => None,
        }
    }

    /// Numeric value for continuous variables; `None` when missing.
    pub fn value(self, row: &FeatureRow) -> Option<f64> {
        match self {
            Variable::ContextLength => Some(row.context_length),
            Variable::ReferenceFrequency => Some(row.reference_frequency as f64),
            Variable::PublicationInterval => Some(row.publication_interval),
            Variable::PaperCitation => Some(row.paper_citation),
            Variable::AuthorSeniority => row.author_seniority,
            Variable::TeamSize => row.team_size.map(f64::from),
            Variable::FirstAuthorSeniority => row.first_author_seniority,
            Variable::LastAuthorSeniority => row.last_author_seniority,
            _ => None,
        }
    }

    /// Whether the row has a usable value for this variable.
    pub fn present(self, row: &FeatureRow) -> bool {
        match self.kind() {
            VarKind::Continuous => self.value(row).is_some(),
            _ => true,
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variable {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        // "With.Field" is accepted as an alias of Within.Field
        let s = if s == "With.Field" { "Within.Field" } else { s };
        Variable::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown variable `{s}`"))
    }
}

/// Model specification: predictors, reference levels, optional level
/// registries and per-variable bin counts.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionSpec {
    pub dependent: String,
    pub predictors: Vec<Variable>,
    /// Reference level per categorical/boolean predictor.
    pub references: BTreeMap<Variable, String>,
    /// When present, every observed level must be listed here.
    pub levels: BTreeMap<Variable, Vec<String>>,
    pub bins: BTreeMap<Variable, usize>,
}

pub const DEFAULT_BINS: usize = 10;

impl RegressionSpec {
    /// The twelve-factor model with the published reference categories:
    /// Physics, year 2000, type Other, and False for every binary factor.
    pub fn main() -> Self {
        let predictors = vec![
            Variable::FieldOfStudy,
            Variable::PublicationYear,
            Variable::PublicationType,
            Variable::OpenAccess,
            Variable::ContextLength,
            Variable::ReferenceFrequency,
            Variable::PublicationInterval,
            Variable::PaperCitation,
            Variable::AuthorSeniority,
            Variable::TeamSize,
            Variable::SelfCitation,
            Variable::WithinField,
        ];
        let references = [
            (Variable::FieldOfStudy, "Physics"),
            (Variable::PublicationYear, "2000"),
            (Variable::PublicationType, "other"),
            (Variable::OpenAccess, "false"),
            (Variable::SelfCitation, "false"),
            (Variable::WithinField, "false"),
        ]
        .into_iter()
        .map(|(v, l)| (v, l.to_string()))
        .collect();
        let bins = predictors.iter().filter(|v| v.kind() == VarKind::Continuous).map(|v| (*v, DEFAULT_BINS)).collect();
        RegressionSpec { dependent: "Fidelity".into(), predictors, references, levels: BTreeMap::new(), bins }
    }

    /// Main model with author seniority split into first- and last-author
    /// H-index.
    pub fn author_position() -> Self {
        let mut s = Self::main();
        let at = s.predictors.iter().position(|v| *v == Variable::AuthorSeniority).unwrap();
        s.predictors.splice(at..=at, [Variable::FirstAuthorSeniority, Variable::LastAuthorSeniority]);
        s.bins.remove(&Variable::AuthorSeniority);
        s.bins.insert(Variable::FirstAuthorSeniority, DEFAULT_BINS);
        s.bins.insert(Variable::LastAuthorSeniority, DEFAULT_BINS);
        s
    }

    pub fn reference(&self, v: Variable) -> &str {
        self.references.get(&v).map(String::as_str).unwrap_or(match v.kind() {
            VarKind::Boolean => "false",
            _ => "",
        })
    }

    /// Parses `key = value` lines. Blank lines and `#` comments are ignored.
    ///
    /// ```text
    /// dependent  = Fidelity
    /// predictors = Field.of.Study, Publication.Year, Open.Access, Context.Length
    /// reference.Field.of.Study = Physics
    /// levels.Field.of.Study = Physics, Biology, Medicine
    /// bins.Context.Length = 12
    /// ```
    ///
    /// Keys not given fall back to [`RegressionSpec::main`].
    pub fn parse(text: &str) -> Result<Self, AnalysisError> {
        let mut spec = Self::main();
        let mut explicit_bins = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |message: String| AnalysisError::SpecParse { line: line_no, message };
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected `key = value`".into()))?;
            let (key, value) = (key.trim(), value.trim());
            let list = || value.split(',').map(str::trim).filter(|s| !s.is_empty());
            if key == "dependent" {
                if !value.eq_ignore_ascii_case("fidelity") && !value.eq_ignore_ascii_case("F") {
                    return Err(err(format!("unsupported dependent variable `{value}`")));
                }
                spec.dependent = value.to_string();
            } else if key == "predictors" {
                spec.predictors = list().map(|s| s.parse().map_err(err)).collect::<Result<_, _>>()?;
            } else if let Some(var) = key.strip_prefix("reference.") {
                let v: Variable = var.parse().map_err(err)?;
                if v.kind() == VarKind::Continuous {
                    return Err(err(format!("{v} is continuous and has no reference level")));
                }
                let level = if v.kind() == VarKind::Boolean || v == Variable::PublicationType {
                    value.to_ascii_lowercase()
                } else {
                    value.to_string()
                };
                if v.kind() == VarKind::Boolean && level != "true" && level != "false" {
                    return Err(err(format!("boolean reference must be true or false, got `{value}`")));
                }
                spec.references.insert(v, level);
            } else if let Some(var) = key.strip_prefix("levels.") {
                let v: Variable = var.parse().map_err(err)?;
                if v.kind() != VarKind::Categorical {
                    return Err(err(format!("{v} is not categorical")));
                }
                spec.levels.insert(v, list().map(str::to_string).collect());
            } else if let Some(var) = key.strip_prefix("bins.") {
                let v: Variable = var.parse().map_err(err)?;
                let n: usize = value.parse().map_err(|_| err(format!("bad bin count `{value}`")))?;
                explicit_bins.insert(v, n);
            } else {
                return Err(err(format!("unknown key `{key}`")));
            }
        }
        spec.bins =
            spec.predictors.iter().filter(|v| v.kind() == VarKind::Continuous).map(|v| (*v, DEFAULT_BINS)).collect();
        spec.bins.extend(explicit_bins);
        if spec.predictors.is_empty() {
            return Err(AnalysisError::SpecParse { line: 0, message: "no predictors".into() });
        }
        Ok(spec)
    }
}

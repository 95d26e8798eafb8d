//! The run configuration: one JSON document describing family, estimator,
//! discretisation, analysis and output.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use jetrao_core::families::{builtin, EstimatorSpec, FamilyRef, Psi, RationalPoly, TabulatedFamily};
use jetrao_core::measures::{counting, gauss_hermite, gauss_legendre, trapezoid, QuadratureRule};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub family: FamilyBlock,
    pub estimator: EstimatorBlock,
    #[serde(default)]
    pub rule: RuleBlock,
    pub analysis: AnalysisBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

/// Exactly one of `name` (a built-in) or `tabulated` (a table file).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tabulated: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parameters: BTreeMap<String, f64>,
}

/// Either `builtin` (the family's canonical estimator, by name or as
/// `"canonical"`) or a polynomial `statistic` in `x` with target `psi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statistic: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RuleBlock {
    /// The family's own rule, optionally refined.
    Recommended {
        #[serde(default = "one")]
        refine: usize,
    },
    GaussHermite {
        n: usize,
        /// Defaults to each analysed θ.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<f64>,
        scale: f64,
    },
    GaussLegendre {
        n: usize,
        a: f64,
        b: f64,
    },
    Counting {
        from: i64,
        to: i64,
    },
    Trapezoid {
        n: usize,
        a: f64,
        b: f64,
    },
}

fn one() -> usize {
    1
}

impl Default for RuleBlock {
    fn default() -> Self {
        RuleBlock::Recommended { refine: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaRange {
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisBlock {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub theta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_range: Option<ThetaRange>,
    pub max_order: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default)]
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

fn invalid(field: &str, message: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {message}"))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// θ values in analysis order: the explicit list, then the range.
    pub fn thetas(&self) -> Result<Vec<f64>, CliError> {
        let mut out = self.analysis.theta.clone();
        if let Some(r) = &self.analysis.theta_range {
            if r.steps == 0 || !(r.from <= r.to) {
                return Err(invalid("analysis.theta_range", "needs from ≤ to and steps ≥ 1"));
            }
            if r.steps == 1 {
                out.push(r.from);
            } else {
                let h = (r.to - r.from) / (r.steps - 1) as f64;
                out.extend((0..r.steps).map(|i| r.from + h * i as f64));
            }
        }
        if out.is_empty() {
            return Err(invalid("analysis.theta", "empty θ list"));
        }
        if let Some(t) = out.iter().find(|t| !t.is_finite()) {
            return Err(invalid("analysis.theta", format!("non-finite θ {t}")));
        }
        Ok(out)
    }

    pub fn resolve_family(&self) -> Result<FamilyRef, CliError> {
        let f = &self.family;
        match (&f.name, &f.tabulated) {
            (Some(name), None) => builtin(name, &f.parameters).map_err(|e| invalid("family", e)),
            (None, Some(path)) => {
                if !f.parameters.is_empty() {
                    return Err(invalid("family.parameters", "tabulated families take none"));
                }
                Ok(Arc::new(
                    TabulatedFamily::from_path(path).map_err(|e| invalid("family.tabulated", e))?,
                ))
            }
            _ => Err(invalid("family", "give exactly one of name or tabulated")),
        }
    }

    pub fn resolve_estimator(&self, family: &FamilyRef) -> Result<EstimatorSpec, CliError> {
        let e = &self.estimator;
        match (&e.builtin, &e.statistic) {
            (Some(name), None) => {
                if e.psi.is_some() {
                    return Err(invalid("estimator.psi", "not used with builtin"));
                }
                let canonical = family.canonical_estimator().ok_or_else(|| {
                    invalid("estimator.builtin", format!("{} has no built-in estimator", family.name()))
                })?;
                if name != "canonical" && *name != canonical.name {
                    return Err(invalid(
                        "estimator.builtin",
                        format!("unknown estimator {name:?} for {} (try {:?})", family.name(), canonical.name),
                    ));
                }
                let mut spec = canonical;
                if let Some(n) = &e.name {
                    spec.name = n.clone();
                }
                Ok(spec)
            }
            (None, Some(stat)) => {
                let statistic =
                    RationalPoly::parse(stat).map_err(|err| invalid("estimator.statistic", err))?;
                let psi = match &e.psi {
                    Some(p) => Psi::parse(p).map_err(|err| invalid("estimator.psi", err))?,
                    None => Psi::identity(),
                };
                let name = e.name.clone().unwrap_or_else(|| statistic.render("x"));
                Ok(EstimatorSpec::new(name, statistic, psi))
            }
            _ => Err(invalid("estimator", "give exactly one of builtin or statistic")),
        }
    }

    pub fn rule_for(&self, family: &FamilyRef, theta: f64) -> Result<QuadratureRule, CliError> {
        let field = "rule";
        Ok(match &self.rule {
            RuleBlock::Recommended { refine } => {
                if *refine == 0 {
                    return Err(invalid("rule.refine", "must be at least 1"));
                }
                family.refined_rule(theta, *refine).map_err(|e| invalid(field, e))?
            }
            RuleBlock::GaussHermite { n, center, scale } => {
                gauss_hermite(*n, center.unwrap_or(theta), *scale).map_err(|e| invalid(field, e))?
            }
            RuleBlock::GaussLegendre { n, a, b } => {
                gauss_legendre(*n, *a, *b).map_err(|e| invalid(field, e))?
            }
            RuleBlock::Counting { from, to } => {
                if from > to {
                    return Err(invalid("rule", "counting needs from ≤ to"));
                }
                counting(&(*from..=*to).collect::<Vec<_>>()).map_err(|e| invalid(field, e))?
            }
            RuleBlock::Trapezoid { n, a, b } => {
                if *n < 2 || !(a < b) {
                    return Err(invalid("rule", "trapezoid needs n ≥ 2 and a < b"));
                }
                let h = (b - a) / (*n - 1) as f64;
                let grid: Vec<f64> = (0..*n).map(|i| a + h * i as f64).collect();
                trapezoid(&grid).map_err(|e| invalid(field, e))?
            }
        })
    }

    /// Checks everything that can be checked before numerical work.
    pub fn validate(&self) -> Result<Validated, CliError> {
        if self.analysis.max_order < 1 {
            return Err(invalid("analysis.max_order", "must be at least 1"));
        }
        if let Some(t) = self.analysis.tol {
            if !(t > 0.0 && t < 1.0) {
                return Err(invalid("analysis.tol", "must lie in (0, 1)"));
            }
        }
        let family = self.resolve_family()?;
        if let Some(max) = family.max_jet_order() {
            if self.analysis.max_order > max {
                return Err(invalid(
                    "analysis.max_order",
                    format!("{} supports jets up to order {max}", family.name()),
                ));
            }
        }
        let estimator = self.resolve_estimator(&family)?;
        let thetas = self.thetas()?;
        for &t in &thetas {
            family
                .check_theta(t)
                .map_err(|e| invalid("analysis.theta", e))?;
        }
        Ok(Validated {
            family,
            estimator,
            thetas,
        })
    }
}

pub struct Validated {
    pub family: FamilyRef,
    pub estimator: EstimatorSpec,
    pub thetas: Vec<f64>,
}

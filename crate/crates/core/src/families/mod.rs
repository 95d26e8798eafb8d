//! Parametric families `f(x; θ)` and the square-root jet stack
//! `η_k = ∂_θ^k √f` evaluated on a quadrature grid.

mod builtin;
mod estimator;
mod jet;
mod spline;
mod tabulated;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::measures::{MeasureError, QuadratureRule};
use crate::series::Series;

pub use builtin::{builtin, builtin_names, Bernoulli, ExponentialRate, GaussianMean, PoissonRate};
pub use estimator::{EstimatorSpec, PolyParseError, Psi, RationalPoly};
pub use jet::{fd_jet_oracle, sqrt_jet, JetMethod, SqrtJet, DENSITY_FLOOR};
pub use spline::QuinticSpline;
pub use tabulated::TabulatedFamily;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FamilyError {
    #[error("unknown family {0:?}")]
    UnknownFamily(String),
    #[error("family {family} needs parameter {name:?}")]
    MissingParameter { family: String, name: String },
    #[error("parameter {name}={value} outside its domain {domain}")]
    ParameterOutOfDomain {
        name: String,
        value: f64,
        domain: String,
    },
    #[error("θ={theta} outside the parameter domain {domain}")]
    ThetaOutOfDomain { theta: f64, domain: String },
    #[error("jet order {requested} not available (family supports up to {max})")]
    OrderTooHigh { requested: usize, max: usize },
    #[error("jet order must be at least 1")]
    OrderTooLow,
    #[error("non-finite square-root jet at node x={x}")]
    NonDifferentiable { x: f64 },
    #[error("node x={0} is not on the tabulated grid")]
    OffGrid(f64),
    #[error("finite-difference step {0} underflows or leaves the parameter domain")]
    StepUnderflow(f64),
    #[error("estimator {name} is not unbiased at θ={theta}: E[T]={mean}, ψ(θ)={target}")]
    NotUnbiased {
        name: String,
        theta: f64,
        mean: f64,
        target: f64,
    },
    #[error("tabulated family, line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Open interval `(lo, hi)` of admissible parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ParamDomain {
    pub lo: f64,
    pub hi: f64,
}

impl ParamDomain {
    pub fn contains(&self, theta: f64) -> bool {
        theta > self.lo && theta < self.hi
    }
}

impl std::fmt::Display for ParamDomain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let show = |v: f64| {
            if v == f64::INFINITY {
                "∞".to_string()
            } else if v == f64::NEG_INFINITY {
                "-∞".to_string()
            } else {
                format!("{v}")
            }
        };
        write!(f, "({},{})", show(self.lo), show(self.hi))
    }
}

/// Summary used by `jetrao families list`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyInfo {
    pub name: String,
    pub parameters: BTreeMap<String, String>,
    pub domain: String,
    pub recommended_rule: String,
    pub canonical_estimator: Option<String>,
}

/// A density `f(x; θ)` with a scalar parameter, differentiable in `θ`
/// through truncated power-series arithmetic.
pub trait ParametricFamily: Send + Sync + std::fmt::Debug {
    fn name(&self) -> &str;

    fn domain(&self) -> ParamDomain;

    /// Truncated series of `f(x; θ + ε)` given `theta` = `θ + ε` as a series.
    fn density_series(&self, x: f64, theta: &Series) -> Result<Series, FamilyError>;

    fn density(&self, x: f64, theta: f64) -> Result<f64, FamilyError> {
        Ok(self.density_series(x, &Series::constant(theta, 0))?.value())
    }

    /// Discretisation of the base measure suited to this family at `θ`.
    fn recommended_rule(&self, theta: f64) -> Result<QuadratureRule, FamilyError> {
        self.refined_rule(theta, 1)
    }

    /// The recommended rule refined by `factor` (more nodes, or a tighter
    /// truncation for discrete supports). Factor 1 is the recommended rule.
    fn refined_rule(&self, theta: f64, factor: usize) -> Result<QuadratureRule, FamilyError>;

    /// Highest jet order the density supports, when finite.
    fn max_jet_order(&self) -> Option<usize> {
        None
    }

    fn canonical_estimator(&self) -> Option<EstimatorSpec> {
        None
    }

    fn info(&self) -> FamilyInfo;

    fn check_theta(&self, theta: f64) -> Result<(), FamilyError> {
        if self.domain().contains(theta) {
            Ok(())
        } else {
            Err(FamilyError::ThetaOutOfDomain {
                theta,
                domain: self.domain().to_string(),
            })
        }
    }
}

pub type FamilyRef = Arc<dyn ParametricFamily>;

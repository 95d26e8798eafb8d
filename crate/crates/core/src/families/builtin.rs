use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use super::{EstimatorSpec, FamilyError, FamilyInfo, FamilyRef, ParamDomain, ParametricFamily, Psi, RationalPoly};
use crate::measures::{counting, gauss_hermite, gauss_legendre, QuadratureRule, Truncation};
use crate::series::Series;

/// Gauss–Hermite nodes for the Gaussian family at refinement 1.
const GAUSSIAN_NODES: usize = 40;
/// Gauss–Legendre nodes on the truncated ray for the exponential family.
const EXPONENTIAL_NODES: usize = 160;
/// The exponential ray is cut at `EXPONENTIAL_CUT / θ`.
const EXPONENTIAL_CUT: f64 = 80.0;
/// Poisson support is extended until the tail mass bound drops below this.
pub(crate) const POISSON_TAIL: f64 = 1e-14;

pub fn builtin_names() -> &'static [&'static str] {
    &["gaussian-mean", "poisson-rate", "bernoulli", "exponential-rate"]
}

/// Looks up a built-in family. `gaussian-mean` takes `sigma`; the others
/// take no parameters.
pub fn builtin(name: &str, params: &BTreeMap<String, f64>) -> Result<FamilyRef, FamilyError> {
    let allowed: &[&str] = match name {
        "gaussian-mean" => &["sigma"],
        "poisson-rate" | "bernoulli" | "exponential-rate" => &[],
        other => return Err(FamilyError::UnknownFamily(other.to_string())),
    };
    if let Some(extra) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(FamilyError::ParameterOutOfDomain {
            name: extra.clone(),
            value: params[extra],
            domain: format!("no such parameter for {name}"),
        });
    }
    Ok(match name {
        "gaussian-mean" => {
            let sigma = *params.get("sigma").ok_or_else(|| FamilyError::MissingParameter {
                family: name.into(),
                name: "sigma".into(),
            })?;
            Arc::new(GaussianMean::new(sigma)?)
        }
        "poisson-rate" => Arc::new(PoissonRate),
        "bernoulli" => Arc::new(Bernoulli),
        _ => Arc::new(ExponentialRate),
    })
}

fn identity_estimator(name: &str) -> EstimatorSpec {
    EstimatorSpec::new(name, RationalPoly::variable(), Psi::Polynomial(RationalPoly::variable()))
}

/// `N(θ, σ²)` with known `σ`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianMean {
    pub sigma: f64,
}

impl GaussianMean {
    pub fn new(sigma: f64) -> Result<Self, FamilyError> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(FamilyError::ParameterOutOfDomain {
                name: "sigma".into(),
                value: sigma,
                domain: "(0,∞)".into(),
            });
        }
        Ok(GaussianMean { sigma })
    }

    fn rule_at(&self, theta: f64, factor: usize) -> Result<QuadratureRule, FamilyError> {
        Ok(gauss_hermite(
            GAUSSIAN_NODES * factor.max(1),
            theta,
            2f64.sqrt() * self.sigma,
        )?)
    }
}

impl ParametricFamily for GaussianMean {
    fn name(&self) -> &str {
        "gaussian-mean"
    }

    fn domain(&self) -> ParamDomain {
        ParamDomain {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    fn density_series(&self, x: f64, theta: &Series) -> Result<Series, FamilyError> {
        let diff = theta.scale(-1.0).add_scalar(x);
        let q = (&diff * &diff).scale(-0.5 / (self.sigma * self.sigma));
        Ok(q.exp().scale(1.0 / ((2.0 * PI).sqrt() * self.sigma)))
    }

    fn refined_rule(&self, theta: f64, factor: usize) -> Result<QuadratureRule, FamilyError> {
        self.rule_at(theta, factor)
    }

    fn canonical_estimator(&self) -> Option<EstimatorSpec> {
        Some(identity_estimator("sample-value"))
    }

    fn info(&self) -> FamilyInfo {
        FamilyInfo {
            name: self.name().into(),
            parameters: [("sigma".to_string(), "(0,∞), required".to_string())].into(),
            domain: self.domain().to_string(),
            recommended_rule: format!(
                "gauss-hermite, n={GAUSSIAN_NODES}, center θ, scale √2·σ"
            ),
            canonical_estimator: Some("T(x) = x for ψ(θ) = θ".into()),
        }
    }
}

/// Poisson(θ) on the nonnegative integers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoissonRate;

impl PoissonRate {
    /// Smallest `N` with a geometric bound on `P(X > N)` below `tail`;
    /// returns `(N, bound)`.
    pub fn truncation_point(theta: f64, tail: f64) -> (usize, f64) {
        let mut log_pmf = -theta; // log p(0)
        let mut n = 0usize;
        loop {
            let next = n + 1;
            let log_next = log_pmf + theta.ln() - (next as f64).ln();
            // p(N+1)·Σ_j (θ/(N+2))^j bounds the tail once N + 2 > θ
            let ratio = theta / (next as f64 + 1.0);
            if ratio < 1.0 {
                let bound = log_next.exp() / (1.0 - ratio);
                if bound < tail {
                    return (n, bound);
                }
            }
            log_pmf = log_next;
            n = next;
        }
    }

    fn rule_at(&self, theta: f64, factor: usize) -> Result<QuadratureRule, FamilyError> {
        // Counting measure is exact; refinement tightens the tail instead.
        let tail = POISSON_TAIL.powi(factor.max(1) as i32).max(1e-300);
        let (n, bound) = Self::truncation_point(theta, tail);
        let support: Vec<i64> = (0..=n as i64).collect();
        Ok(counting(&support)?.with_truncation(Truncation {
            description: format!("support truncated to 0..={n}"),
            tail_mass_bound: bound,
        }))
    }
}

fn log_factorial(x: u64) -> f64 {
    (2..=x).map(|k| (k as f64).ln()).sum()
}

impl ParametricFamily for PoissonRate {
    fn name(&self) -> &str {
        "poisson-rate"
    }

    fn domain(&self) -> ParamDomain {
        ParamDomain {
            lo: 0.0,
            hi: f64::INFINITY,
        }
    }

    fn density_series(&self, x: f64, theta: &Series) -> Result<Series, FamilyError> {
        if x < 0.0 || x.fract() != 0.0 {
            return Ok(Series::constant(0.0, theta.order()));
        }
        let log_f = if x == 0.0 {
            theta.scale(-1.0)
        } else {
            (&theta.ln().scale(x) - theta).add_scalar(-log_factorial(x as u64))
        };
        Ok(log_f.exp())
    }

    fn refined_rule(&self, theta: f64, factor: usize) -> Result<QuadratureRule, FamilyError> {
        self.rule_at(theta, factor)
    }

    fn canonical_estimator(&self) -> Option<EstimatorSpec> {
        Some(identity_estimator("sample-value"))
    }

    fn info(&self) -> FamilyInfo {
        FamilyInfo {
            name: self.name().into(),
            parameters: BTreeMap::new(),
            domain: self.domain().to_string(),
            recommended_rule: format!("counting on 0..=N, tail mass < {POISSON_TAIL:e}"),
            canonical_estimator: Some("T(x) = x for ψ(θ) = θ".into()),
        }
    }
}

/// Bernoulli(θ) on {0, 1}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bernoulli;

impl ParametricFamily for Bernoulli {
    fn name(&self) -> &str {
        "bernoulli"
    }

    fn domain(&self) -> ParamDomain {
        ParamDomain { lo: 0.0, hi: 1.0 }
    }

    fn density_series(&self, x: f64, theta: &Series) -> Result<Series, FamilyError> {
        Ok(if x == 1.0 {
            theta.clone()
        } else if x == 0.0 {
            theta.scale(-1.0).add_scalar(1.0)
        } else {
            Series::constant(0.0, theta.order())
        })
    }

    fn refined_rule(&self, _theta: f64, _factor: usize) -> Result<QuadratureRule, FamilyError> {
        Ok(counting(&[0, 1])?)
    }

    fn canonical_estimator(&self) -> Option<EstimatorSpec> {
        Some(identity_estimator("sample-value"))
    }

    fn info(&self) -> FamilyInfo {
        FamilyInfo {
            name: self.name().into(),
            parameters: BTreeMap::new(),
            domain: self.domain().to_string(),
            recommended_rule: "counting on {0,1}".into(),
            canonical_estimator: Some("T(x) = x for ψ(θ) = θ".into()),
        }
    }
}

/// Exponential with rate θ: `f(x; θ) = θ e^{−θx}` on `x ≥ 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentialRate;

impl ExponentialRate {
    fn rule_at(&self, theta: f64, factor: usize) -> Result<QuadratureRule, FamilyError> {
        let cut = EXPONENTIAL_CUT / theta;
        Ok(
            gauss_legendre(EXPONENTIAL_NODES * factor.max(1), 0.0, cut)?.with_truncation(Truncation {
                description: format!("ray truncated to [0, {cut}]"),
                tail_mass_bound: (-EXPONENTIAL_CUT).exp(),
            }),
        )
    }
}

impl ParametricFamily for ExponentialRate {
    fn name(&self) -> &str {
        "exponential-rate"
    }

    fn domain(&self) -> ParamDomain {
        ParamDomain {
            lo: 0.0,
            hi: f64::INFINITY,
        }
    }

    fn density_series(&self, x: f64, theta: &Series) -> Result<Series, FamilyError> {
        if x < 0.0 {
            return Ok(Series::constant(0.0, theta.order()));
        }
        Ok(theta * &theta.scale(-x).exp())
    }

    fn refined_rule(&self, theta: f64, factor: usize) -> Result<QuadratureRule, FamilyError> {
        self.rule_at(theta, factor)
    }

    fn canonical_estimator(&self) -> Option<EstimatorSpec> {
        Some(EstimatorSpec::new(
            "sample-value",
            RationalPoly::variable(),
            Psi::Reciprocal,
        ))
    }

    fn info(&self) -> FamilyInfo {
        FamilyInfo {
            name: self.name().into(),
            parameters: BTreeMap::new(),
            domain: self.domain().to_string(),
            recommended_rule: format!(
                "gauss-legendre, n={EXPONENTIAL_NODES}, on [0, {EXPONENTIAL_CUT}/θ]"
            ),
            canonical_estimator: Some("T(x) = x for ψ(θ) = 1/θ".into()),
        }
    }
}

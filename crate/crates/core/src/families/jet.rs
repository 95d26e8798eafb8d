//! The square-root jet stack `η_k = ∂_θ^k √f` on a quadrature grid.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::{FamilyError, ParametricFamily};
use crate::measures::{compensated_sum, GridFunction, QuadratureRule};
use crate::series::Series;

/// Nodes whose density falls below this are dropped from jet rows.
pub const DENSITY_FLOOR: f64 = 1e-300;

/// Highest order the finite-difference oracle supports.
pub const FD_MAX_ORDER: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum JetMethod {
    Series,
    FiniteDifference,
    ClosedForm,
}

#[derive(Clone, Debug)]
pub struct SqrtJet {
    pub theta: f64,
    pub order: usize,
    /// `rows[k]` holds `η_k` at every node.
    pub rows: Vec<GridFunction>,
    pub method: JetMethod,
    /// Indices of nodes below [`DENSITY_FLOOR`]; their rows are zero.
    pub dropped: Vec<usize>,
    /// `Σ w_i f(x_i)` over the dropped nodes.
    pub dropped_mass: f64,
}

impl SqrtJet {
    pub fn rule(&self) -> &Arc<QuadratureRule> {
        self.rows[0].rule()
    }

    pub fn row(&self, k: usize) -> &GridFunction {
        &self.rows[k]
    }

    /// Copy with row `k` replaced, for constructing degenerate spans.
    pub fn with_row(&self, k: usize, row: GridFunction) -> SqrtJet {
        let mut out = self.clone();
        out.rows[k] = row;
        out
    }
}

fn check_order(family: &dyn ParametricFamily, m: usize) -> Result<(), FamilyError> {
    if m < 1 {
        return Err(FamilyError::OrderTooLow);
    }
    match family.max_jet_order() {
        Some(max) if m > max => Err(FamilyError::OrderTooHigh { requested: m, max }),
        _ => Ok(()),
    }
}

/// Rows `0..=m` of the jet at `theta`, by Taylor-mode arithmetic per node.
pub fn sqrt_jet(
    family: &dyn ParametricFamily,
    theta: f64,
    rule: Arc<QuadratureRule>,
    m: usize,
) -> Result<SqrtJet, FamilyError> {
    family.check_theta(theta)?;
    check_order(family, m)?;
    let var = Series::variable(theta, m);
    let per_node: Vec<Option<(f64, Vec<f64>)>> = rule
        .nodes
        .par_iter()
        .map(|&x| {
            let f = family.density_series(x, &var)?;
            if !f.value().is_finite() {
                return Err(FamilyError::NonDifferentiable { x });
            }
            if f.value() < DENSITY_FLOOR {
                return Ok(None);
            }
            let root = f.sqrt().derivatives();
            if root.iter().any(|v| !v.is_finite()) {
                return Err(FamilyError::NonDifferentiable { x });
            }
            Ok(Some((f.value(), root)))
        })
        .collect::<Result<_, FamilyError>>()?;

    let mut dropped = Vec::new();
    let mut lost = Vec::new();
    let mut rows = vec![vec![0.0; rule.len()]; m + 1];
    for (i, entry) in per_node.into_iter().enumerate() {
        match entry {
            Some((_, root)) => {
                for (k, v) in root.into_iter().enumerate() {
                    rows[k][i] = v;
                }
            }
            None => {
                dropped.push(i);
                let f = family.density(rule.nodes[i], theta)?;
                lost.push(rule.weights[i] * f);
            }
        }
    }
    assemble(theta, m, rule, rows, JetMethod::Series, dropped, compensated_sum(lost))
}

fn assemble(
    theta: f64,
    order: usize,
    rule: Arc<QuadratureRule>,
    rows: Vec<Vec<f64>>,
    method: JetMethod,
    dropped: Vec<usize>,
    dropped_mass: f64,
) -> Result<SqrtJet, FamilyError> {
    let rows = rows
        .into_iter()
        .map(|r| GridFunction::new(rule.clone(), r))
        .collect::<Result<_, _>>()?;
    Ok(SqrtJet {
        theta,
        order,
        rows,
        method,
        dropped,
        dropped_mass,
    })
}

/// Central-difference stencils for derivatives `1..=4` at step `h`:
/// offsets `-2..=2` and their weights (before dividing by `h^k`).
const STENCIL: [[f64; 5]; 4] = [
    [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0],
    [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0],
    [-0.5, 1.0, 0.0, -1.0, 0.5],
    [1.0, -4.0, 6.0, -4.0, 1.0],
];
/// Leading error orders of the stencils above, in powers of `h`.
const STENCIL_ORDER: [i32; 4] = [4, 4, 2, 2];

/// Independent check on [`sqrt_jet`]: central differences of `√f` in `θ`
/// with two levels of Richardson extrapolation (steps `h`, `h/2`, `h/4`).
/// Dropped nodes follow the same floor as the series path.
pub fn fd_jet_oracle(
    family: &dyn ParametricFamily,
    theta: f64,
    rule: Arc<QuadratureRule>,
    m: usize,
    h: f64,
) -> Result<SqrtJet, FamilyError> {
    family.check_theta(theta)?;
    if m < 1 {
        return Err(FamilyError::OrderTooLow);
    }
    if m > FD_MAX_ORDER {
        return Err(FamilyError::OrderTooHigh {
            requested: m,
            max: FD_MAX_ORDER,
        });
    }
    let domain = family.domain();
    let underflow = !(h > 0.0)
        || !h.is_finite()
        || theta + h / 4.0 == theta
        || !domain.contains(theta - 2.0 * h)
        || !domain.contains(theta + 2.0 * h);
    if underflow {
        return Err(FamilyError::StepUnderflow(h));
    }
    let steps = [h, h / 2.0, h / 4.0];

    let root = |x: f64, t: f64| -> Result<f64, FamilyError> {
        Ok(family.density(x, t)?.max(0.0).sqrt())
    };
    let mut rows = vec![vec![0.0; rule.len()]; m + 1];
    let mut dropped = Vec::new();
    let mut lost = Vec::new();
    for (i, &x) in rule.nodes.iter().enumerate() {
        let f0 = family.density(x, theta)?;
        if f0 < DENSITY_FLOOR {
            dropped.push(i);
            lost.push(rule.weights[i] * f0);
            continue;
        }
        rows[0][i] = f0.sqrt();
        let mut samples = Vec::with_capacity(3);
        for &s in &steps {
            let vals = [-2.0, -1.0, 0.0, 1.0, 2.0]
                .map(|j| root(x, theta + j * s));
            let mut v = [0.0; 5];
            for (slot, r) in v.iter_mut().zip(vals) {
                *slot = r?;
            }
            samples.push(v);
        }
        for k in 1..=m {
            let est: Vec<f64> = steps
                .iter()
                .zip(&samples)
                .map(|(s, v)| {
                    let num: f64 = STENCIL[k - 1].iter().zip(v).map(|(c, f)| c * f).sum();
                    num / s.powi(k as i32)
                })
                .collect();
            rows[k][i] = richardson(&est, STENCIL_ORDER[k - 1]);
        }
    }
    assemble(
        theta,
        m,
        rule,
        rows,
        JetMethod::FiniteDifference,
        dropped,
        compensated_sum(lost),
    )
}

/// Two extrapolation levels for estimates at steps `h, h/2, h/4` whose
/// errors expand in even powers starting at `h^p`.
fn richardson(est: &[f64], p: i32) -> f64 {
    let a = 2f64.powi(p);
    let b = 2f64.powi(p + 2);
    let r1 = (a * est[1] - est[0]) / (a - 1.0);
    let r2 = (a * est[2] - est[1]) / (a - 1.0);
    (b * r2 - r1) / (b - 1.0)
}

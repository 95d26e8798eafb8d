//! Densities supplied as a table over a `θ` grid and an `x` grid.
//!
//! ```text
//! # comments and blank lines are ignored
//! theta-grid 0.5 1.0 1.5 2.0 2.5 3.0
//! x-grid 0 1 2 3
//! x-weights 1 1 1 1        # optional; trapezoid weights otherwise
//! density
//! 0.61 0.30 0.08 0.01      # one row per theta-grid value
//! ...
//! ```
//!
//! Values between grid points of `θ` come from a natural quintic spline per
//! `x`, which limits jets to order 4. Spline derivatives converge more
//! slowly than the density itself, so jets of tabulated families are only
//! as good as the `θ` grid is fine.

use std::collections::BTreeMap;
use std::path::Path;

use super::spline::{FittedSpline, QuinticSpline};
use super::{FamilyError, FamilyInfo, ParamDomain, ParametricFamily};
use crate::measures::{trapezoid, QuadratureRule, RuleKind, Support};
use crate::series::Series;

pub const TABULATED_MAX_ORDER: usize = 4;
/// Each tabulated row must integrate to one within this.
pub const NORMALISATION_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct TabulatedFamily {
    name: String,
    theta_grid: Vec<f64>,
    rule: QuadratureRule,
    splines: Vec<FittedSpline>,
}

fn err(line: usize, message: impl Into<String>) -> FamilyError {
    FamilyError::Parse {
        line,
        message: message.into(),
    }
}

fn numbers(line: usize, words: &[&str]) -> Result<Vec<f64>, FamilyError> {
    words
        .iter()
        .map(|w| {
            w.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(line, format!("not a finite number: {w:?}")))
        })
        .collect()
}

impl TabulatedFamily {
    pub fn from_path(path: &Path) -> Result<Self, FamilyError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| err(0, format!("cannot read {}: {e}", path.display())))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "tabulated".into());
        Self::parse(&name, &text)
    }

    pub fn parse(name: &str, text: &str) -> Result<Self, FamilyError> {
        let mut theta_grid = None;
        let mut x_grid: Option<Vec<f64>> = None;
        let mut x_weights = None;
        let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
        let mut in_density = false;
        let mut last_line = 0;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            last_line = line;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let words: Vec<&str> = content.split_whitespace().collect();
            if in_density {
                rows.push((line, numbers(line, &words)?));
                continue;
            }
            let slot = match words[0] {
                "theta-grid" => &mut theta_grid,
                "x-grid" => &mut x_grid,
                "x-weights" => &mut x_weights,
                "density" if words.len() == 1 => {
                    in_density = true;
                    continue;
                }
                other => return Err(err(line, format!("unexpected {other:?}"))),
            };
            if slot.is_some() {
                return Err(err(line, format!("{} given twice", words[0])));
            }
            *slot = Some(numbers(line, &words[1..])?);
        }
        let theta_grid = theta_grid.ok_or_else(|| err(last_line, "missing theta-grid"))?;
        let x_grid = x_grid.ok_or_else(|| err(last_line, "missing x-grid"))?;
        if !in_density {
            return Err(err(last_line, "missing density block"));
        }
        if rows.len() != theta_grid.len() {
            return Err(err(
                last_line,
                format!("{} density rows for {} theta values", rows.len(), theta_grid.len()),
            ));
        }
        for (line, row) in &rows {
            if row.len() != x_grid.len() {
                return Err(err(
                    *line,
                    format!("{} values for {} x-grid points", row.len(), x_grid.len()),
                ));
            }
            if row.iter().any(|v| *v < 0.0) {
                return Err(err(*line, "negative density"));
            }
        }
        let rule = match x_weights {
            None => trapezoid(&x_grid)?,
            Some(w) => {
                if x_grid.windows(2).any(|p| p[1] <= p[0]) {
                    return Err(crate::measures::MeasureError::Unsorted.into());
                }
                let (a, b) = (x_grid[0], x_grid[x_grid.len() - 1]);
                let kind = if w.iter().all(|v| *v == 1.0) && x_grid.iter().all(|x| x.fract() == 0.0) {
                    RuleKind::Counting
                } else {
                    RuleKind::Trapezoid
                };
                let support = if kind == RuleKind::Counting {
                    Support::Points
                } else {
                    Support::Interval { a, b }
                };
                QuadratureRule::new(kind, x_grid.clone(), w, support)?
            }
        };
        for (line, row) in &rows {
            let total: f64 = crate::measures::compensated_sum(
                row.iter().zip(&rule.weights).map(|(f, w)| f * w),
            );
            if (total - 1.0).abs() > NORMALISATION_TOL {
                return Err(err(*line, format!("row integrates to {total}, not 1")));
            }
        }
        let spline = QuinticSpline::new(&theta_grid).map_err(|e| match e {
            FamilyError::Parse { message, .. } => err(0, format!("theta-grid: {message}")),
            other => other,
        })?;
        let splines = (0..x_grid.len())
            .map(|j| {
                let column: Vec<f64> = rows.iter().map(|(_, r)| r[j]).collect();
                spline.fit(&column)
            })
            .collect::<Result<_, _>>()?;
        Ok(TabulatedFamily {
            name: name.to_string(),
            theta_grid,
            rule,
            splines,
        })
    }

    pub fn theta_grid(&self) -> &[f64] {
        &self.theta_grid
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    fn node_index(&self, x: f64) -> Result<usize, FamilyError> {
        let nodes = &self.rule.nodes;
        let tol = 1e-12 * x.abs().max(1.0);
        let i = nodes.partition_point(|n| *n < x - tol);
        if i < nodes.len() && (nodes[i] - x).abs() <= tol {
            Ok(i)
        } else {
            Err(FamilyError::OffGrid(x))
        }
    }
}

impl ParametricFamily for TabulatedFamily {
    fn name(&self) -> &str {
        &self.name
    }

    fn domain(&self) -> ParamDomain {
        ParamDomain {
            lo: self.theta_grid[0],
            hi: self.theta_grid[self.theta_grid.len() - 1],
        }
    }

    fn density_series(&self, x: f64, theta: &Series) -> Result<Series, FamilyError> {
        let order = theta.order();
        if order > TABULATED_MAX_ORDER {
            return Err(FamilyError::OrderTooHigh {
                requested: order,
                max: TABULATED_MAX_ORDER,
            });
        }
        let i = self.node_index(x)?;
        let t0 = theta.value();
        let derivs = self.splines[i].derivatives(t0, order);
        // f(t0 + δ) = Σ_k f^(k)(t0)/k! δ^k, composed by Horner in δ
        let delta = theta.add_scalar(-t0);
        let mut out = Series::constant(0.0, order);
        let mut fact = (1..=order).map(|k| k as f64).product::<f64>();
        for k in (0..=order).rev() {
            out = (&out * &delta).add_scalar(derivs[k] / fact);
            fact /= k.max(1) as f64;
        }
        Ok(out)
    }

    fn refined_rule(&self, _theta: f64, _factor: usize) -> Result<QuadratureRule, FamilyError> {
        // the x-grid is fixed by the table
        Ok(self.rule.clone())
    }

    fn max_jet_order(&self) -> Option<usize> {
        Some(TABULATED_MAX_ORDER)
    }

    fn info(&self) -> FamilyInfo {
        FamilyInfo {
            name: self.name.clone(),
            parameters: BTreeMap::new(),
            domain: self.domain().to_string(),
            recommended_rule: format!("{:?} on the tabulated x-grid ({} nodes)", self.rule.kind, self.rule.len()),
            canonical_estimator: None,
        }
    }
}

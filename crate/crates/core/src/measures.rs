//! Discretised base measures and the `L²(μ)` inner product.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("invalid scale {0}")]
    InvalidScale(f64),
    #[error("a rule needs at least one node")]
    Empty,
    #[error("duplicate node {0}")]
    DuplicateNode(f64),
    #[error("nodes and weights differ in length ({nodes} vs {weights})")]
    LengthMismatch { nodes: usize, weights: usize },
    #[error("weight {value} at node {index} is not positive")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("grid functions belong to different rules")]
    RuleMismatch,
    #[error("grid nodes must be strictly increasing")]
    Unsorted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    GaussHermite,
    GaussLegendre,
    Trapezoid,
    Counting,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "type")]
pub enum Support {
    Interval { a: f64, b: f64 },
    RealLine { center: f64, scale: f64 },
    Points,
}

/// Where an unbounded support was cut off and how much mass (or a bound on
/// it) was discarded.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Truncation {
    pub description: String,
    pub tail_mass_bound: f64,
}

/// Nodes and positive weights so that `Σ w_i φ(x_i) ≈ ∫ φ dμ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadratureRule {
    pub kind: RuleKind,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub support: Support,
    pub truncation: Option<Truncation>,
}

impl QuadratureRule {
    pub fn new(
        kind: RuleKind,
        nodes: Vec<f64>,
        weights: Vec<f64>,
        support: Support,
    ) -> Result<Self, MeasureError> {
        if nodes.is_empty() {
            return Err(MeasureError::Empty);
        }
        if nodes.len() != weights.len() {
            return Err(MeasureError::LengthMismatch {
                nodes: nodes.len(),
                weights: weights.len(),
            });
        }
        if let Some((index, &value)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(**w > 0.0) || !w.is_finite())
        {
            return Err(MeasureError::NonPositiveWeight { index, value });
        }
        Ok(QuadratureRule {
            kind,
            nodes,
            weights,
            support,
            truncation: None,
        })
    }

    pub fn with_truncation(mut self, t: Truncation) -> Self {
        self.truncation = Some(t);
        self
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_i φ(x_i)` in ascending node order with compensated summation.
    pub fn integrate<F: Fn(f64) -> f64>(&self, phi: F) -> f64 {
        compensated_sum(
            self.nodes
                .iter()
                .zip(&self.weights)
                .map(|(&x, &w)| w * phi(x)),
        )
    }
}

/// Neumaier's compensated sum, consumed strictly in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Standard n-point Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<QuadratureRule, MeasureError> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(MeasureError::InvalidInterval { a, b });
    }
    if n == 0 {
        return Err(MeasureError::Empty);
    }
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess for the i-th largest root, then Newton.
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = mid - half * x;
        nodes[n - 1 - i] = mid + half * x;
        weights[i] = half * w;
        weights[n - 1 - i] = half * w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = mid;
    }
    QuadratureRule::new(
        RuleKind::GaussLegendre,
        nodes,
        weights,
        Support::Interval { a, b },
    )
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Hermite rule for `∫ φ(x) dx` with `x = center + scale·t`.
///
/// Weights are folded with `e^{t²}` so the rule applies to plain integrands
/// with Gaussian tails: it is exact for `e^{−t²}·poly(t)` up to degree
/// `2n − 1`.
pub fn gauss_hermite(n: usize, center: f64, scale: f64) -> Result<QuadratureRule, MeasureError> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(MeasureError::InvalidScale(scale));
    }
    if n == 0 {
        return Err(MeasureError::Empty);
    }
    let roots = hermite_roots(n);
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for t in roots {
        // folded weight = 1 / (n ψ_{n−1}(t)²) with ψ the orthonormal Hermite functions
        let psi = hermite_functions(n - 1, t);
        nodes.push(center + scale * t);
        weights.push(scale / (n as f64 * psi * psi));
    }
    QuadratureRule::new(
        RuleKind::GaussHermite,
        nodes,
        weights,
        Support::RealLine { center, scale },
    )
}

/// Roots of the degree-n Hermite polynomial, ascending.
fn hermite_roots(n: usize) -> Vec<f64> {
    let nf = n as f64;
    let mut roots = vec![0.0; n];
    let mut z = 0.0_f64;
    for i in 0..n.div_ceil(2) {
        // Initial guesses from Numerical Recipes' gauher.
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * roots[n - 1],
            3 => 1.91 * z - 0.91 * roots[n - 2],
            _ => 2.0 * z - roots[n - i + 1],
        };
        for _ in 0..200 {
            let (p, pm1) = orthonormal_hermite(n, z);
            let dp = (2.0 * nf).sqrt() * pm1;
            let dz = p / dp;
            z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        roots[n - 1 - i] = z;
        roots[i] = -z;
    }
    if n % 2 == 1 {
        roots[n / 2] = 0.0;
    }
    roots
}

/// `(p̃_n(x), p̃_{n−1}(x))` for polynomials orthonormal against `e^{−x²}`.
fn orthonormal_hermite(n: usize, x: f64) -> (f64, f64) {
    let mut p1 = PI.powf(-0.25);
    let mut p2 = 0.0;
    for j in 0..n {
        let jf = j as f64;
        let p3 = p2;
        p2 = p1;
        p1 = x * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
    }
    (p1, p2)
}

/// Orthonormal Hermite function `ψ_k(x) = p̃_k(x) e^{−x²/2}`.
fn hermite_functions(k: usize, x: f64) -> f64 {
    let mut p1 = PI.powf(-0.25) * (-0.5 * x * x).exp();
    let mut p2 = 0.0;
    for j in 0..k {
        let jf = j as f64;
        let p3 = p2;
        p2 = p1;
        p1 = x * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
    }
    p1
}

/// Counting measure on an explicit finite support.
pub fn counting(support: &[i64]) -> Result<QuadratureRule, MeasureError> {
    if support.is_empty() {
        return Err(MeasureError::Empty);
    }
    let mut seen = std::collections::BTreeSet::new();
    for &x in support {
        if !seen.insert(x) {
            return Err(MeasureError::DuplicateNode(x as f64));
        }
    }
    QuadratureRule::new(
        RuleKind::Counting,
        support.iter().map(|&x| x as f64).collect(),
        vec![1.0; support.len()],
        Support::Points,
    )
}

/// Trapezoid weights on a strictly increasing (possibly non-uniform) grid.
pub fn trapezoid(grid: &[f64]) -> Result<QuadratureRule, MeasureError> {
    if grid.len() < 2 {
        return Err(MeasureError::Empty);
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(MeasureError::Unsorted);
    }
    let n = grid.len();
    let weights = (0..n)
        .map(|i| {
            let left = if i > 0 { grid[i] - grid[i - 1] } else { 0.0 };
            let right = if i + 1 < n { grid[i + 1] - grid[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect();
    QuadratureRule::new(
        RuleKind::Trapezoid,
        grid.to_vec(),
        weights,
        Support::Interval {
            a: grid[0],
            b: grid[n - 1],
        },
    )
}

/// A discretised element of `L²(μ)`: values aligned with a rule's nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    rule: Arc<QuadratureRule>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(rule: Arc<QuadratureRule>, values: Vec<f64>) -> Result<Self, MeasureError> {
        if values.len() != rule.len() {
            return Err(MeasureError::LengthMismatch {
                nodes: rule.len(),
                weights: values.len(),
            });
        }
        Ok(GridFunction { rule, values })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(rule: &Arc<QuadratureRule>, f: F) -> Self {
        let values = rule.nodes.iter().map(|&x| f(x)).collect();
        GridFunction {
            rule: rule.clone(),
            values,
        }
    }

    pub fn zeros(rule: &Arc<QuadratureRule>) -> Self {
        GridFunction {
            rule: rule.clone(),
            values: vec![0.0; rule.len()],
        }
    }

    pub fn rule(&self) -> &Arc<QuadratureRule> {
        &self.rule
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn norm_sq(&self) -> f64 {
        inner_product(self, self).expect("same rule")
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `self + k·other`.
    pub fn axpy(&self, k: f64, other: &GridFunction) -> Result<GridFunction, MeasureError> {
        same_rule(self, other)?;
        Ok(GridFunction {
            rule: self.rule.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + k * b)
                .collect(),
        })
    }

    pub fn scaled(&self, k: f64) -> GridFunction {
        GridFunction {
            rule: self.rule.clone(),
            values: self.values.iter().map(|v| k * v).collect(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

fn same_rule(a: &GridFunction, b: &GridFunction) -> Result<(), MeasureError> {
    if Arc::ptr_eq(&a.rule, &b.rule) || a.rule == b.rule {
        Ok(())
    } else {
        Err(MeasureError::RuleMismatch)
    }
}

/// `⟨φ, ψ⟩ = Σ_i w_i φ_i ψ_i`.
pub fn inner_product(phi: &GridFunction, psi: &GridFunction) -> Result<f64, MeasureError> {
    same_rule(phi, psi)?;
    Ok(compensated_sum(
        phi.rule
            .weights
            .iter()
            .zip(phi.values.iter().zip(&psi.values))
            .map(|(w, (a, b))| w * a * b),
    ))
}

//! Projection of an estimator's residual onto jet spans
//! `T_m = span{η_1, …, η_m}` and the resulting ladder of variance bounds.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::families::{EstimatorSpec, FamilyError, SqrtJet};
use crate::measures::{inner_product, GridFunction, MeasureError, RuleKind, Truncation};

/// Above this (Jacobi-scaled) condition number the solve switches to the
/// eigendecomposition.
pub const CONDITION_LIMIT: f64 = 1e12;
/// Eigenvalues below `SPECTRAL_CUTOFF · λ_max` count as zero.
pub const SPECTRAL_CUTOFF: f64 = 1e-12;
/// Default relative tolerance for efficiency detection.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Relative tolerance for `⟨e, η_0⟩ = 0`.
pub const UNBIASED_TOL: f64 = 1e-8;
/// Label used wherever the ladder is reported.
pub const LADDER_LABEL: &str = "square-root jet-span bounds";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("Gram matrix of η_1..η_{m} has numerical rank {rank} < {m}")]
    GramSingular { m: usize, rank: usize },
    #[error("order {requested} exceeds the jet order {available}")]
    OrderTooHigh { requested: usize, available: usize },
    #[error("order must be at least 1")]
    OrderTooLow,
    #[error("residual is not orthogonal to η_0: ⟨e, η_0⟩ = {inner} (estimator not unbiased at θ={theta})")]
    NotUnbiased { theta: f64, inner: f64 },
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Factorization {
    Cholesky,
    /// Eigendecomposition with small eigenvalues discarded.
    Spectral { rank: usize },
}

/// `G c = b` for `G_ij = ⟨η_i, η_j⟩`, `b_i = ⟨e, η_i⟩`, `i, j ∈ 1..=m`.
#[derive(Clone, Debug)]
pub struct GramSystem {
    pub order: usize,
    pub g: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
    /// `λ_max/λ_min` of the unit-diagonal rescaling of `G`.
    pub condition: f64,
    pub factorization: Factorization,
}

impl GramSystem {
    /// `β_m = bᵀ c`.
    pub fn beta(&self) -> f64 {
        self.b.dot(&self.c)
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self.factorization, Factorization::Spectral { rank } if rank < self.order)
    }

    /// `‖G c − b‖`.
    pub fn solve_residual(&self) -> f64 {
        (&self.g * &self.c - &self.b).norm()
    }
}

/// `e_i = (T(x_i) − ψ(θ)) η_0(x_i)`, checked for `⟨e, η_0⟩ = 0`.
pub fn residual(est: &EstimatorSpec, jet: &SqrtJet) -> Result<GridFunction, BoundsError> {
    let rule = jet.rule();
    let target = est.psi.value(jet.theta);
    let values = rule
        .nodes
        .iter()
        .zip(jet.rows[0].values())
        .map(|(&x, &s)| (est.statistic(x) - target) * s)
        .collect();
    let e = GridFunction::new(rule.clone(), values)?;
    let inner = inner_product(&e, &jet.rows[0])?;
    if inner.abs() > UNBIASED_TOL * target.abs().max(1.0) {
        return Err(BoundsError::NotUnbiased {
            theta: jet.theta,
            inner,
        });
    }
    Ok(e)
}

/// Assembles and solves the order-`m` system; rank deficiency is an error.
pub fn gram(jet: &SqrtJet, m: usize, e: &GridFunction) -> Result<GramSystem, BoundsError> {
    gram_with(jet, m, e, false)
}

/// As [`gram`], but with `allow_degenerate` a rank-deficient system is
/// solved in the least-squares sense on the retained eigenspace.
pub fn gram_with(
    jet: &SqrtJet,
    m: usize,
    e: &GridFunction,
    allow_degenerate: bool,
) -> Result<GramSystem, BoundsError> {
    check_order(jet, m)?;
    let mut g = DMatrix::zeros(m, m);
    let mut b = DVector::zeros(m);
    for i in 0..m {
        for j in 0..=i {
            let v = inner_product(&jet.rows[i + 1], &jet.rows[j + 1])?;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
        b[i] = inner_product(e, &jet.rows[i + 1])?;
    }
    solve(g, b, allow_degenerate)
}

fn check_order(jet: &SqrtJet, m: usize) -> Result<(), BoundsError> {
    if m < 1 {
        return Err(BoundsError::OrderTooLow);
    }
    if m > jet.order {
        return Err(BoundsError::OrderTooHigh {
            requested: m,
            available: jet.order,
        });
    }
    Ok(())
}

fn solve(g: DMatrix<f64>, b: DVector<f64>, allow_degenerate: bool) -> Result<GramSystem, BoundsError> {
    let m = g.nrows();
    // unit-diagonal rescaling so that rows of very different size do not
    // masquerade as near-dependence
    let d = DVector::from_iterator(
        m,
        g.diagonal()
            .iter()
            .map(|v| if *v > 0.0 { 1.0 / v.sqrt() } else { 0.0 }),
    );
    let scaled = DMatrix::from_fn(m, m, |i, j| g[(i, j)] * d[i] * d[j]);
    let sb = b.component_mul(&d);
    let eig = SymmetricEigen::new(scaled.clone());
    let lmax = eig.eigenvalues.max().max(0.0);
    let lmin = eig.eigenvalues.min();
    let condition = if lmin > 0.0 { lmax / lmin } else { f64::INFINITY };
    let zero_diag = d.iter().any(|v| *v == 0.0);

    let cholesky = if condition <= CONDITION_LIMIT && !zero_diag {
        scaled.clone().cholesky()
    } else {
        None
    };
    let (sc, factorization) = match cholesky {
        Some(ch) => (ch.solve(&sb), Factorization::Cholesky),
        None => {
            let cutoff = SPECTRAL_CUTOFF * lmax;
            let keep: Vec<usize> = (0..m).filter(|&k| eig.eigenvalues[k] > cutoff).collect();
            let rank = keep.len();
            if rank < m && !allow_degenerate {
                return Err(BoundsError::GramSingular { m, rank });
            }
            let mut sc = DVector::zeros(m);
            for k in keep {
                let v = eig.eigenvectors.column(k);
                sc += v * (v.dot(&sb) / eig.eigenvalues[k]);
            }
            (sc, Factorization::Spectral { rank })
        }
    };
    let c = sc.component_mul(&d);
    Ok(GramSystem {
        order: m,
        g,
        b,
        c,
        condition,
        factorization,
    })
}

/// `c_1, …, c_m` with `e ≈ Σ c_k η_k`.
pub fn ode_coefficients(system: &GramSystem) -> Vec<f64> {
    system.c.iter().copied().collect()
}

/// `e − Σ_k c_k η_k` on the grid.
pub fn projection_residual(
    jet: &SqrtJet,
    e: &GridFunction,
    coefficients: &[f64],
) -> Result<GridFunction, BoundsError> {
    let mut r = e.clone();
    for (k, c) in coefficients.iter().enumerate() {
        r = r.axpy(-c, &jet.rows[k + 1])?;
    }
    Ok(r)
}

/// `(e − P_m e)/‖e − P_m e‖`, or `None` when `e ∈ T_m` to rounding.
pub fn residual_direction(
    jet: &SqrtJet,
    e: &GridFunction,
    system: &GramSystem,
) -> Result<Option<GridFunction>, BoundsError> {
    let r = projection_residual(jet, e, &ode_coefficients(system))?;
    let n = r.norm();
    Ok((n > f64::EPSILON * e.norm().max(f64::MIN_POSITIVE)).then(|| r.scaled(1.0 / n)))
}

/// `‖η_{m+1} − P_m η_{m+1}‖`, the part of the next jet direction normal to
/// `T_m`.
pub fn next_normal_component(
    jet: &SqrtJet,
    m: usize,
    allow_degenerate: bool,
) -> Result<f64, BoundsError> {
    check_order(jet, m + 1)?;
    let next = &jet.rows[m + 1];
    let sys = gram_with(jet, m, next, allow_degenerate)?;
    Ok(projection_residual(jet, next, &ode_coefficients(&sys))?.norm())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub order: usize,
    pub attained: bool,
    /// `max_i |e_i − Σ_k c_k η_k(x_i)|`.
    pub sup_residual: f64,
    pub rho: f64,
}

/// Attained iff `ρ_m ≤ tol·Var` and the pointwise residual is at most
/// `√tol·‖e‖`.
pub fn efficiency_certificate(
    jet: &SqrtJet,
    e: &GridFunction,
    m: usize,
    tol: f64,
) -> Result<Certificate, BoundsError> {
    let sys = gram(jet, m, e)?;
    certificate_from(jet, e, &sys, tol)
}

fn certificate_from(
    jet: &SqrtJet,
    e: &GridFunction,
    sys: &GramSystem,
    tol: f64,
) -> Result<Certificate, BoundsError> {
    let var = e.norm_sq();
    let rho = var - sys.beta();
    let sup_residual = projection_residual(jet, e, &ode_coefficients(sys))?.sup_norm();
    let attained = rho <= tol * var && sup_residual <= tol.sqrt() * var.sqrt();
    Ok(Certificate {
        order: sys.order,
        attained,
        sup_residual,
        rho,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LadderEntry {
    pub m: usize,
    pub beta: f64,
    /// `Var − β_m`.
    pub rho: f64,
    /// `‖e − Σ c_k η_k‖²`, computed pointwise.
    pub rho_pythagoras: f64,
    pub coefficients: Vec<f64>,
    /// Whether `c_m` contributes above rounding: `|c_m|·‖η_m‖ > tol·‖e‖`.
    pub last_coefficient_nonzero: bool,
    /// `‖η_{m+1} − P_m η_{m+1}‖` when the jet reaches order `m + 1`.
    pub next_normal_component: Option<f64>,
    pub sup_residual: f64,
    pub certified: bool,
    pub condition: f64,
    pub factorization: Factorization,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Discretization {
    pub rule: RuleKind,
    pub nodes: usize,
    pub truncation: Option<Truncation>,
    pub dropped_nodes: usize,
    pub dropped_mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub label: String,
    pub theta: f64,
    pub estimator: String,
    pub variance: f64,
    pub tolerance: f64,
    pub ladder: Vec<LadderEntry>,
    /// Smallest `m` with `ρ_m ≤ tol·Var`.
    pub efficiency_order: Option<usize>,
    /// Smallest `m` whose certificate (L² and pointwise) passes.
    pub certified_order: Option<usize>,
    pub degenerate: bool,
    pub discretization: Discretization,
}

pub struct LadderOptions {
    pub max_order: usize,
    pub tol: f64,
    pub allow_degenerate: bool,
}

/// `β_1 ≤ … ≤ β_M` with coefficients, residuals and certificates.
pub fn bound_ladder(
    jet: &SqrtJet,
    e: &GridFunction,
    estimator: &str,
    opts: &LadderOptions,
) -> Result<BoundReport, BoundsError> {
    check_order(jet, opts.max_order)?;
    let var = e.norm_sq();
    let norm_e = var.sqrt();
    let entries: Vec<LadderEntry> = (1..=opts.max_order)
        .into_par_iter()
        .map(|m| {
            let sys = gram_with(jet, m, e, opts.allow_degenerate)?;
            let cert = certificate_from(jet, e, &sys, opts.tol)?;
            let coefficients = ode_coefficients(&sys);
            let rho_pythagoras =
                projection_residual(jet, e, &coefficients)?.norm_sq();
            let last = coefficients[m - 1].abs() * jet.rows[m].norm();
            let next_normal_component = if m < jet.order {
                Some(next_normal_component(jet, m, opts.allow_degenerate)?)
            } else {
                None
            };
            Ok(LadderEntry {
                m,
                beta: sys.beta(),
                rho: var - sys.beta(),
                rho_pythagoras,
                last_coefficient_nonzero: last > opts.tol * norm_e,
                coefficients,
                next_normal_component,
                sup_residual: cert.sup_residual,
                certified: cert.attained,
                condition: sys.condition,
                factorization: sys.factorization,
            })
        })
        .collect::<Result<_, BoundsError>>()?;
    let efficiency_order = entries
        .iter()
        .find(|en| en.rho <= opts.tol * var)
        .map(|en| en.m);
    let certified_order = entries.iter().find(|en| en.certified).map(|en| en.m);
    let degenerate = entries
        .iter()
        .any(|en| matches!(en.factorization, Factorization::Spectral { rank } if rank < en.m));
    let rule = jet.rule();
    Ok(BoundReport {
        label: LADDER_LABEL.into(),
        theta: jet.theta,
        estimator: estimator.into(),
        variance: var,
        tolerance: opts.tol,
        ladder: entries,
        efficiency_order,
        certified_order,
        degenerate,
        discretization: Discretization {
            rule: rule.kind,
            nodes: rule.len(),
            truncation: rule.truncation.clone(),
            dropped_nodes: jet.dropped.len(),
            dropped_mass: jet.dropped_mass,
        },
    })
}

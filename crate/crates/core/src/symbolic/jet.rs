//! Contact geometry of `J^m(ℝ×ℝ)`: contact forms, the total derivative,
//! structural curvature and its reduction modulo the contact ideal, the
//! torsion form, the split tangent of a prolonged section and the vector
//! field of an explicit ODE.

use std::fmt;
use std::sync::Arc;

use super::context::JetContext;
use super::forms::{evaluate_form, exterior_derivative, interior_product, wedge, OneForm, TwoForm, VectorField};
use super::poly::{AtomRef, CoeffExpr, Coord, Var};
use super::SymbolicError;

/// `ω_k = ds_k − s_{k+1} dθ`, defined for `0 ≤ k ≤ m − 1`.
pub fn contact_form(ctx: &Arc<JetContext>, k: usize) -> Result<OneForm, SymbolicError> {
    if k >= ctx.order() {
        return Err(SymbolicError::IndexOutOfRange {
            index: k,
            order: ctx.order(),
        });
    }
    OneForm::new(
        ctx,
        [
            (Coord::S(k), CoeffExpr::one()),
            (Coord::Theta, ctx.s(k + 1)?.neg()),
        ],
    )
}

/// `D^(m) = ∂θ + s₁∂s₀ + … + s_m ∂s_{m−1}`. The `∂s_m` slot is empty.
pub fn total_derivative(ctx: &Arc<JetContext>) -> Result<VectorField, SymbolicError> {
    if ctx.order() == 0 {
        return Err(SymbolicError::IndexOutOfRange { index: 0, order: 0 });
    }
    let mut entries = vec![(Coord::Theta, CoeffExpr::one())];
    for k in 0..ctx.order() {
        entries.push((Coord::S(k), ctx.s(k + 1)?));
    }
    VectorField::new(ctx, entries)
}

/// `dω_{m−1}` on `J^m`, the structural curvature form. Stored without any
/// normalising constant.
pub fn structural_curvature(ctx: &Arc<JetContext>) -> Result<TwoForm, SymbolicError> {
    let top = ctx
        .order()
        .checked_sub(1)
        .ok_or(SymbolicError::IndexOutOfRange { index: 0, order: 0 })?;
    Ok(exterior_derivative(&contact_form(ctx, top)?))
}

/// One-form generators used when rewriting modulo the contact ideal of
/// `J^n`: the basis `{dθ, ω₀, …, ω_{n−1}, ds_n}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum IdealGenerator {
    DTheta,
    Contact(usize),
    TopDs,
}

impl IdealGenerator {
    fn to_form(self, ctx: &Arc<JetContext>) -> Result<OneForm, SymbolicError> {
        match self {
            IdealGenerator::DTheta => OneForm::basis(ctx, Coord::Theta),
            IdealGenerator::Contact(k) => contact_form(ctx, k),
            IdealGenerator::TopDs => OneForm::basis(ctx, Coord::S(ctx.order())),
        }
    }
}

impl fmt::Display for IdealGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdealGenerator::DTheta => write!(f, "dθ"),
            IdealGenerator::Contact(k) => write!(f, "ω{}", super::poly::subscript(*k)),
            IdealGenerator::TopDs => write!(f, "ds_top"),
        }
    }
}

/// `coeff · left ∧ ω_contact`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealTerm {
    pub coeff: CoeffExpr,
    pub left: IdealGenerator,
    pub contact: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionResult {
    /// Part of the input outside the contact ideal; always a multiple of
    /// `dθ∧ds_n`.
    pub residue: TwoForm,
    pub ideal_part: Vec<IdealTerm>,
}

impl ReductionResult {
    pub fn in_ideal(&self) -> bool {
        self.residue.is_zero()
    }

    /// `residue + Σ coeff·left∧ω_k`, back in coordinate form.
    pub fn expand(&self) -> Result<TwoForm, SymbolicError> {
        let ctx = self.residue.context().clone();
        let mut total = self.residue.clone();
        for term in &self.ideal_part {
            let left = term.left.to_form(&ctx)?;
            let omega = contact_form(&ctx, term.contact)?;
            total = total.add(&wedge(&left, &omega)?.scale(&term.coeff))?;
        }
        Ok(total)
    }
}

fn rewrite_covector(
    ctx: &Arc<JetContext>,
    c: Coord,
) -> Result<Vec<(IdealGenerator, CoeffExpr)>, SymbolicError> {
    let top = ctx.order();
    Ok(match c {
        Coord::Theta => vec![(IdealGenerator::DTheta, CoeffExpr::one())],
        Coord::S(k) if k < top => vec![
            (IdealGenerator::Contact(k), CoeffExpr::one()),
            (IdealGenerator::DTheta, ctx.s(k + 1)?),
        ],
        Coord::S(_) => vec![(IdealGenerator::TopDs, CoeffExpr::one())],
    })
}

/// Rewrites `omega` in `ctx_higher` with `ds_k = ω_k + s_{k+1} dθ` for every
/// `k < n`, splitting it into a residue and a contact-ideal part. The
/// decomposition is re-expanded and compared against the input before it is
/// returned.
pub fn reduce_mod_contact_ideal(
    omega: &TwoForm,
    ctx_higher: &Arc<JetContext>,
) -> Result<ReductionResult, SymbolicError> {
    let input = omega.embed(ctx_higher)?;
    let mut pairs: std::collections::BTreeMap<(IdealGenerator, IdealGenerator), CoeffExpr> =
        Default::default();
    for ((a, b), coeff) in input.entries() {
        for (ga, ca) in rewrite_covector(ctx_higher, *a)? {
            for (gb, cb) in rewrite_covector(ctx_higher, *b)? {
                let value = coeff.mul(&ca).mul(&cb);
                let (key, value) = match ga.cmp(&gb) {
                    std::cmp::Ordering::Less => ((ga, gb), value),
                    std::cmp::Ordering::Greater => ((gb, ga), value.neg()),
                    std::cmp::Ordering::Equal => continue,
                };
                let slot = pairs.entry(key).or_default();
                *slot = slot.add(&value);
            }
        }
    }

    let mut residue = TwoForm::zero(ctx_higher);
    let mut ideal_part = Vec::new();
    for ((left, right), coeff) in pairs {
        if coeff.is_zero() {
            continue;
        }
        match (left, right) {
            (IdealGenerator::DTheta, IdealGenerator::TopDs) => {
                residue = TwoForm::new(
                    ctx_higher,
                    [(Coord::Theta, Coord::S(ctx_higher.order()), coeff)],
                )?;
            }
            (_, IdealGenerator::Contact(k)) => ideal_part.push(IdealTerm {
                coeff,
                left,
                contact: k,
            }),
            (IdealGenerator::Contact(k), IdealGenerator::TopDs) => ideal_part.push(IdealTerm {
                coeff: coeff.neg(),
                left: IdealGenerator::TopDs,
                contact: k,
            }),
            _ => unreachable!("generator pairs are strictly ordered"),
        }
    }

    let result = ReductionResult {
        residue,
        ideal_part,
    };
    if result.expand()? != input {
        return Err(SymbolicError::IdentityViolation(
            "contact-ideal decomposition does not re-expand to its input".into(),
        ));
    }
    Ok(result)
}

/// Tangent `X = d/dθ j^m s` split against the canonical connection:
/// `X_H = D^(m)` and `X_V = σ_{m+1} ∂s_m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitTangent {
    pub horizontal: VectorField,
    pub vertical: VectorField,
    pub whole: VectorField,
    /// Name of the atom standing in for `s^{(m+1)}(θ)`.
    pub sigma: String,
}

impl SplitTangent {
    /// View `X` inside `J^{m+1}`, where the derivative atom becomes the new
    /// coordinate `s_{m+1}`.
    pub fn lift(&self, higher: &Arc<JetContext>) -> Result<VectorField, SymbolicError> {
        let m = self.whole.context().order();
        if higher.order() != m + 1 {
            return Err(SymbolicError::ContextMismatch {
                left: m + 1,
                right: higher.order(),
            });
        }
        self.whole.substitute_into(
            higher,
            &Var::Atom(AtomRef::plain(self.sigma.clone())),
            &higher.s(m + 1)?,
        )
    }
}

pub fn prolonged_tangent(
    ctx: &Arc<JetContext>,
    sigma_next: &str,
) -> Result<SplitTangent, SymbolicError> {
    let sigma = ctx.atom_expr(sigma_next)?;
    let horizontal = total_derivative(ctx)?;
    let vertical = VectorField::new(ctx, [(Coord::S(ctx.order()), sigma)])?;
    let whole = horizontal.add(&vertical)?;
    Ok(SplitTangent {
        horizontal,
        vertical,
        whole,
        sigma: sigma_next.to_string(),
    })
}

/// `Ω_m = i_{D_θ} dω_{m−1}` computed on `J^{m+1}`. Fails unless the result
/// coincides with the contact form `ω_m` there.
pub fn torsion_form(m: usize) -> Result<OneForm, SymbolicError> {
    if m == 0 {
        return Err(SymbolicError::IndexOutOfRange { index: 0, order: 0 });
    }
    let higher = JetContext::new(m)?.prolonged();
    let curvature = exterior_derivative(&contact_form(&higher, m - 1)?);
    let omega = interior_product(&total_derivative(&higher)?, &curvature)?;
    if omega != contact_form(&higher, m)? {
        return Err(SymbolicError::IdentityViolation(format!(
            "Ω_{m} = {omega} differs from ω_{m}"
        )));
    }
    Ok(omega)
}

/// `ds_m − g dθ` on `J^{m+1}`, the constraint cut out by `s_{m+1} = g`.
pub fn ode_constraint_form(
    ctx: &Arc<JetContext>,
    g: &CoeffExpr,
) -> Result<OneForm, SymbolicError> {
    let m = ode_base_order(ctx)?;
    OneForm::new(ctx, [(Coord::S(m), CoeffExpr::one()), (Coord::Theta, g.neg())])
}

fn ode_base_order(ctx: &JetContext) -> Result<usize, SymbolicError> {
    ctx.order()
        .checked_sub(1)
        .ok_or(SymbolicError::IndexOutOfRange { index: 0, order: 0 })
}

/// `Y = ∂θ + s₁∂s₀ + … + s_m∂s_{m−1} + g ∂s_m` on a context of order `m + 1`,
/// the restriction of `D^(m+1)` to `{s_{m+1} = g}`. Checks that `Y`
/// annihilates `ω₀, …, ω_{m−1}` and `ds_m − g dθ`.
pub fn ode_vector_field(
    ctx: &Arc<JetContext>,
    g: &CoeffExpr,
) -> Result<VectorField, SymbolicError> {
    let m = ode_base_order(ctx)?;
    ctx.check_expr(g)?;
    let next = Coord::S(m + 1);
    for v in g.vars() {
        let forbidden = match &v {
            Var::Coord(c) => *c == next,
            Var::Atom(a) => ctx.depends(a, next) || a.partials.contains(&next),
        };
        if forbidden {
            return Err(SymbolicError::ForbiddenDependence(format!(
                "right-hand side references {} through {v}",
                next.symbol()
            )));
        }
    }

    let mut entries = vec![(Coord::Theta, CoeffExpr::one())];
    for k in 0..m {
        entries.push((Coord::S(k), ctx.s(k + 1)?));
    }
    entries.push((Coord::S(m), g.clone()));
    let y = VectorField::new(ctx, entries)?;

    let mut annihilated: Vec<OneForm> = (0..m).map(|k| contact_form(ctx, k)).collect::<Result<_, _>>()?;
    annihilated.push(ode_constraint_form(ctx, g)?);
    for form in &annihilated {
        let value = evaluate_form(form, &y)?;
        if !value.is_zero() {
            return Err(SymbolicError::IdentityViolation(format!(
                "({form})(Y) = {value}"
            )));
        }
    }
    Ok(y)
}

/// A point `(θ, s₀, …, s_m)` of `J^m`.
#[derive(Clone, Debug, PartialEq)]
pub struct JetPoint<T> {
    pub theta: T,
    pub s: Vec<T>,
}

impl<T: Clone> JetPoint<T> {
    pub fn order(&self) -> usize {
        self.s.len().saturating_sub(1)
    }

    /// `π_{m,k}`: forget derivatives above order `k`.
    pub fn project(&self, k: usize) -> Result<JetPoint<T>, SymbolicError> {
        if self.s.is_empty() || k > self.order() {
            return Err(SymbolicError::IndexOutOfRange {
                index: k,
                order: self.order(),
            });
        }
        Ok(JetPoint {
            theta: self.theta.clone(),
            s: self.s[..=k].to_vec(),
        })
    }
}

pub fn project_jet<T: Clone>(point: &JetPoint<T>, k: usize) -> Result<JetPoint<T>, SymbolicError> {
    point.project(k)
}

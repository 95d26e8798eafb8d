//! The exact identity suite run by `jetrao jet-check`.

use serde::Serialize;

use super::context::{JetContext, DEFAULT_MAX_ORDER};
use super::forms::{evaluate_form, exterior_derivative, interior_product, OneForm, TwoForm, VectorField};
use super::jet::{
    contact_form, ode_constraint_form, ode_vector_field, prolonged_tangent,
    reduce_mod_contact_ideal, torsion_form, total_derivative,
};
use super::poly::{CoeffExpr, Coord};
use super::SymbolicError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub order: usize,
    pub passed: bool,
    /// Rendered object that witnesses the identity (or the failure).
    pub witness: String,
}

const SIGMA: &str = "σ";
const RHS: &str = "g";

/// Runs every identity for `m = 1..=max_order`.
pub fn identity_suite(max_order: usize) -> Result<Vec<IdentityCheck>, SymbolicError> {
    if max_order == 0 || max_order > DEFAULT_MAX_ORDER {
        return Err(SymbolicError::OrderExceedsLimit {
            order: max_order,
            limit: DEFAULT_MAX_ORDER,
        });
    }
    let mut out = Vec::new();
    for m in 1..=max_order {
        out.extend(checks_for_order(m));
    }
    Ok(out)
}

/// All identities at a single order `m ≥ 1`.
pub fn checks_for_order(m: usize) -> Vec<IdentityCheck> {
    type Check = fn(usize) -> Result<(bool, String), SymbolicError>;
    let checks: [(&str, Check); 8] = [
        ("contact-forms-annihilate-total-derivative", contact_annihilation),
        ("curvature-equals-dtheta-wedge-ds-top", curvature_shape),
        ("curvature-outside-contact-ideal-on-Jm", curvature_not_in_ideal),
        ("curvature-inside-contact-ideal-on-Jm+1", curvature_in_ideal),
        ("torsion-equals-next-contact-form", torsion_is_contact),
        ("torsion-vanishes-on-prolonged-tangent", torsion_on_tangent),
        ("split-tangent-horizontal-plus-vertical", split_tangent),
        ("ode-field-annihilates-constraint-forms", ode_field),
    ];
    checks
        .iter()
        .map(|(name, f)| {
            let (passed, witness) = match f(m) {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            IdentityCheck {
                name: name.to_string(),
                order: m,
                passed,
                witness,
            }
        })
        .collect()
}

fn top_wedge(ctx: &std::sync::Arc<JetContext>, m: usize) -> Result<TwoForm, SymbolicError> {
    TwoForm::new(ctx, [(Coord::Theta, Coord::S(m), CoeffExpr::one())])
}

fn contact_annihilation(m: usize) -> Result<(bool, String), SymbolicError> {
    let ctx = JetContext::new(m)?;
    let d = total_derivative(&ctx)?;
    let mut ok = true;
    for k in 0..m {
        ok &= evaluate_form(&contact_form(&ctx, k)?, &d)?.is_zero();
    }
    Ok((ok, format!("D^({m}) = {d}")))
}

fn curvature_shape(m: usize) -> Result<(bool, String), SymbolicError> {
    let ctx = JetContext::new(m)?;
    let curv = exterior_derivative(&contact_form(&ctx, m - 1)?);
    Ok((curv == top_wedge(&ctx, m)?, format!("dω{} = {curv}", sub(m - 1))))
}

fn curvature_not_in_ideal(m: usize) -> Result<(bool, String), SymbolicError> {
    let ctx = JetContext::new(m)?;
    let curv = exterior_derivative(&contact_form(&ctx, m - 1)?);
    let r = reduce_mod_contact_ideal(&curv, &ctx)?;
    Ok((!r.in_ideal(), format!("residue on J^{m}: {}", r.residue)))
}

fn curvature_in_ideal(m: usize) -> Result<(bool, String), SymbolicError> {
    let ctx = JetContext::new(m)?;
    let curv = exterior_derivative(&contact_form(&ctx, m - 1)?);
    let higher = ctx.prolonged();
    let r = reduce_mod_contact_ideal(&curv, &higher)?;
    let terms: Vec<String> = r
        .ideal_part
        .iter()
        .map(|t| {
            let c = t.coeff.to_string();
            let scale = if c == "1" { String::new() } else { format!("({c})·") };
            format!("{scale}{}∧ω{}", t.left, sub(t.contact))
        })
        .collect();
    Ok((
        r.in_ideal() && r.expand()? == curv.embed(&higher)?,
        format!("dω{} = {} mod contact ideal on J^{}", sub(m - 1), terms.join(" + "), m + 1),
    ))
}

fn torsion_is_contact(m: usize) -> Result<(bool, String), SymbolicError> {
    let omega = torsion_form(m)?;
    let expect = contact_form(omega.context(), m)?;
    Ok((omega == expect, format!("Ω{} = {omega}", sub(m))))
}

fn torsion_on_tangent(m: usize) -> Result<(bool, String), SymbolicError> {
    let ctx = JetContext::with_atoms(m, [(SIGMA, vec![])])?;
    let x = prolonged_tangent(&ctx, SIGMA)?;
    let higher = ctx.prolonged();
    let lifted = x.lift(&higher)?;
    let omega = torsion_form(m)?.embed(&higher)?;
    let value = evaluate_form(&omega, &lifted)?;
    Ok((value.is_zero(), format!("Ω{}(X) = {value}, X = {}", sub(m), x.whole)))
}

fn split_tangent(m: usize) -> Result<(bool, String), SymbolicError> {
    let ctx = JetContext::with_atoms(m, [(SIGMA, vec![])])?;
    let x = prolonged_tangent(&ctx, SIGMA)?;
    let sum = x.horizontal.add(&x.vertical)?;
    let ok = sum == x.whole
        && x.horizontal == total_derivative(&ctx)?
        && x.vertical.support() == vec![Coord::S(m)]
        && x.horizontal.component(Coord::Theta).is_one();
    Ok((ok, format!("X_H = {}, X_V = {}", x.horizontal, x.vertical)))
}

fn ode_field(m: usize) -> Result<(bool, String), SymbolicError> {
    let deps: Vec<Coord> = std::iter::once(Coord::Theta)
        .chain((0..=m).map(Coord::S))
        .collect();
    let ctx = JetContext::with_atoms(m, [(RHS, deps)])?.prolonged();
    let g = CoeffExpr::atom(RHS);
    let y = ode_vector_field(&ctx, &g)?;

    let mut ok = true;
    for k in 0..m {
        ok &= evaluate_form(&contact_form(&ctx, k)?, &y)?.is_zero();
    }
    ok &= evaluate_form(&ode_constraint_form(&ctx, &g)?, &y)?.is_zero();

    let d = total_derivative(&ctx)?;
    let expected_gap = VectorField::new(&ctx, [(Coord::S(m), g.sub(&ctx.s(m + 1)?))])?;
    ok &= y.sub(&d)? == expected_gap;

    // Y leaves the Cartan distribution of J^{m+1}: ω_m(Y) = g − s_{m+1}.
    let off = evaluate_form(&contact_form(&ctx, m)?, &y)?;
    ok &= off == g.sub(&ctx.s(m + 1)?);

    // contracting dθ∧ds_m with Y reproduces the constraint form
    let contracted: OneForm = interior_product(&y, &top_wedge(&ctx, m)?)?;
    ok &= contracted == ode_constraint_form(&ctx, &g)?;

    Ok((ok, format!("Y = {y}")))
}

fn sub(k: usize) -> String {
    super::poly::subscript(k)
}

//! One-forms, two-forms and vector fields on a finite jet space.
//!
//! Two-forms are stored on the ordered basis `dθ∧ds_k`, `ds_j∧ds_k`
//! (`j < k`); [`Coord`]'s ordering puts `θ` first, so a pair `(a, b)` with
//! `a < b` is always in canonical orientation.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::context::JetContext;
use super::poly::{CoeffExpr, Coord, Var};
use super::SymbolicError;

fn same_context(a: &Arc<JetContext>, b: &Arc<JetContext>) -> Result<(), SymbolicError> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(SymbolicError::ContextMismatch {
            left: a.order(),
            right: b.order(),
        })
    }
}

fn accumulate<K: Ord>(map: &mut BTreeMap<K, CoeffExpr>, key: K, value: CoeffExpr) {
    if value.is_zero() {
        return;
    }
    match map.get_mut(&key) {
        Some(existing) => {
            *existing = existing.add(&value);
            if existing.is_zero() {
                map.remove(&key);
            }
        }
        None => {
            map.insert(key, value);
        }
    }
}

fn check_entries<'a, I>(ctx: &JetContext, coords: I) -> Result<(), SymbolicError>
where
    I: IntoIterator<Item = (&'a [Coord], &'a CoeffExpr)>,
{
    for (cs, expr) in coords {
        for c in cs {
            ctx.check_coord(*c)?;
        }
        ctx.check_expr(expr)?;
    }
    Ok(())
}

/// A one-form `Σ a_b db` over the basis covectors `{dθ, ds₀, …, ds_m}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneForm {
    ctx: Arc<JetContext>,
    coeffs: BTreeMap<Coord, CoeffExpr>,
}

impl OneForm {
    pub fn zero(ctx: &Arc<JetContext>) -> Self {
        OneForm {
            ctx: ctx.clone(),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn new<I>(ctx: &Arc<JetContext>, entries: I) -> Result<Self, SymbolicError>
    where
        I: IntoIterator<Item = (Coord, CoeffExpr)>,
    {
        let mut coeffs = BTreeMap::new();
        for (c, e) in entries {
            check_entries(ctx, [(std::slice::from_ref(&c), &e)])?;
            accumulate(&mut coeffs, c, e);
        }
        Ok(OneForm {
            ctx: ctx.clone(),
            coeffs,
        })
    }

    /// The basis covector `dc`.
    pub fn basis(ctx: &Arc<JetContext>, c: Coord) -> Result<Self, SymbolicError> {
        Self::new(ctx, [(c, CoeffExpr::one())])
    }

    pub fn context(&self) -> &Arc<JetContext> {
        &self.ctx
    }

    pub fn coeff(&self, c: Coord) -> CoeffExpr {
        self.coeffs.get(&c).cloned().unwrap_or_default()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Coord, &CoeffExpr)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &OneForm) -> Result<OneForm, SymbolicError> {
        same_context(&self.ctx, &other.ctx)?;
        let mut coeffs = self.coeffs.clone();
        for (c, e) in &other.coeffs {
            accumulate(&mut coeffs, *c, e.clone());
        }
        Ok(OneForm {
            ctx: self.ctx.clone(),
            coeffs,
        })
    }

    pub fn sub(&self, other: &OneForm) -> Result<OneForm, SymbolicError> {
        self.add(&other.scale(&CoeffExpr::integer(-1)))
    }

    /// Multiply every coefficient by a function (no context check on
    /// `f`; callers build it from the same context).
    pub fn scale(&self, f: &CoeffExpr) -> OneForm {
        let mut coeffs = BTreeMap::new();
        for (c, e) in &self.coeffs {
            accumulate(&mut coeffs, *c, e.mul(f));
        }
        OneForm {
            ctx: self.ctx.clone(),
            coeffs,
        }
    }

    /// Re-home into a context whose roster and atom table contain this one's.
    pub fn embed(&self, target: &Arc<JetContext>) -> Result<OneForm, SymbolicError> {
        OneForm::new(target, self.coeffs.clone())
    }
}

/// A two-form on the ordered basis `{dθ∧ds_k, ds_j∧ds_k : j < k}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoForm {
    ctx: Arc<JetContext>,
    coeffs: BTreeMap<(Coord, Coord), CoeffExpr>,
}

impl TwoForm {
    pub fn zero(ctx: &Arc<JetContext>) -> Self {
        TwoForm {
            ctx: ctx.clone(),
            coeffs: BTreeMap::new(),
        }
    }

    /// Builds from arbitrary `(a, b, coeff)` triples meaning `coeff·da∧db`;
    /// pairs are reoriented into the canonical basis and diagonal pairs
    /// vanish.
    pub fn new<I>(ctx: &Arc<JetContext>, entries: I) -> Result<Self, SymbolicError>
    where
        I: IntoIterator<Item = (Coord, Coord, CoeffExpr)>,
    {
        let mut out = TwoForm::zero(ctx);
        for (a, b, e) in entries {
            check_entries(ctx, [(&[a, b][..], &e)])?;
            out.push(a, b, e);
        }
        Ok(out)
    }

    fn push(&mut self, a: Coord, b: Coord, e: CoeffExpr) {
        use std::cmp::Ordering;
        match a.cmp(&b) {
            Ordering::Less => accumulate(&mut self.coeffs, (a, b), e),
            Ordering::Greater => accumulate(&mut self.coeffs, (b, a), e.neg()),
            Ordering::Equal => {}
        }
    }

    pub fn context(&self) -> &Arc<JetContext> {
        &self.ctx
    }

    /// Coefficient of `da∧db` in whichever orientation is requested.
    pub fn coeff(&self, a: Coord, b: Coord) -> CoeffExpr {
        if a < b {
            self.coeffs.get(&(a, b)).cloned().unwrap_or_default()
        } else if a > b {
            self.coeffs.get(&(b, a)).map(CoeffExpr::neg).unwrap_or_default()
        } else {
            CoeffExpr::zero()
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(Coord, Coord), &CoeffExpr)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &TwoForm) -> Result<TwoForm, SymbolicError> {
        same_context(&self.ctx, &other.ctx)?;
        let mut out = self.clone();
        for ((a, b), e) in &other.coeffs {
            out.push(*a, *b, e.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &TwoForm) -> Result<TwoForm, SymbolicError> {
        self.add(&other.scale(&CoeffExpr::integer(-1)))
    }

    pub fn scale(&self, f: &CoeffExpr) -> TwoForm {
        let mut out = TwoForm::zero(&self.ctx);
        for ((a, b), e) in &self.coeffs {
            out.push(*a, *b, e.mul(f));
        }
        out
    }

    pub fn embed(&self, target: &Arc<JetContext>) -> Result<TwoForm, SymbolicError> {
        TwoForm::new(
            target,
            self.coeffs.iter().map(|((a, b), e)| (*a, *b, e.clone())),
        )
    }
}

/// A vector field `Σ Y_b ∂/∂b` over `{∂θ, ∂s₀, …, ∂s_m}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField {
    ctx: Arc<JetContext>,
    comps: BTreeMap<Coord, CoeffExpr>,
}

impl VectorField {
    pub fn zero(ctx: &Arc<JetContext>) -> Self {
        VectorField {
            ctx: ctx.clone(),
            comps: BTreeMap::new(),
        }
    }

    pub fn new<I>(ctx: &Arc<JetContext>, entries: I) -> Result<Self, SymbolicError>
    where
        I: IntoIterator<Item = (Coord, CoeffExpr)>,
    {
        let mut comps = BTreeMap::new();
        for (c, e) in entries {
            check_entries(ctx, [(std::slice::from_ref(&c), &e)])?;
            accumulate(&mut comps, c, e);
        }
        Ok(VectorField {
            ctx: ctx.clone(),
            comps,
        })
    }

    pub fn basis(ctx: &Arc<JetContext>, c: Coord) -> Result<Self, SymbolicError> {
        Self::new(ctx, [(c, CoeffExpr::one())])
    }

    pub fn context(&self) -> &Arc<JetContext> {
        &self.ctx
    }

    pub fn component(&self, c: Coord) -> CoeffExpr {
        self.comps.get(&c).cloned().unwrap_or_default()
    }

    pub fn components(&self) -> impl Iterator<Item = (&Coord, &CoeffExpr)> {
        self.comps.iter()
    }

    /// Basis directions with a nonzero component.
    pub fn support(&self) -> Vec<Coord> {
        self.comps.keys().copied().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField, SymbolicError> {
        same_context(&self.ctx, &other.ctx)?;
        let mut comps = self.comps.clone();
        for (c, e) in &other.comps {
            accumulate(&mut comps, *c, e.clone());
        }
        Ok(VectorField {
            ctx: self.ctx.clone(),
            comps,
        })
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField, SymbolicError> {
        same_context(&self.ctx, &other.ctx)?;
        let mut comps = self.comps.clone();
        for (c, e) in &other.comps {
            accumulate(&mut comps, *c, e.neg());
        }
        Ok(VectorField {
            ctx: self.ctx.clone(),
            comps,
        })
    }

    pub fn embed(&self, target: &Arc<JetContext>) -> Result<VectorField, SymbolicError> {
        VectorField::new(target, self.comps.clone())
    }

    /// Substitute `v := replacement` in every component, then re-home into
    /// `target`. Used to identify the derivative atom `σ_{m+1}` with the
    /// coordinate `s_{m+1}` once the field is viewed inside `J^{m+1}`.
    pub fn substitute_into(
        &self,
        target: &Arc<JetContext>,
        v: &Var,
        replacement: &CoeffExpr,
    ) -> Result<VectorField, SymbolicError> {
        VectorField::new(
            target,
            self.comps
                .iter()
                .map(|(c, e)| (*c, e.substitute(v, replacement))),
        )
    }
}

/// `α∧β`, bilinear and antisymmetric.
pub fn wedge(alpha: &OneForm, beta: &OneForm) -> Result<TwoForm, SymbolicError> {
    same_context(&alpha.ctx, &beta.ctx)?;
    let mut out = TwoForm::zero(&alpha.ctx);
    for (a, ea) in &alpha.coeffs {
        for (b, eb) in &beta.coeffs {
            out.push(*a, *b, ea.mul(eb));
        }
    }
    Ok(out)
}

/// `d(Σ a_b db) = Σ_b Σ_c ∂_c a_b dc∧db`, differentiating against every
/// roster coordinate.
pub fn exterior_derivative(omega: &OneForm) -> TwoForm {
    let ctx = &omega.ctx;
    let mut out = TwoForm::zero(ctx);
    for (b, coeff) in &omega.coeffs {
        for c in ctx.roster() {
            let dc = coeff.partial(c, |atom, coord| ctx.depends(atom, coord));
            out.push(c, *b, dc);
        }
    }
    out
}

/// `d` of a function: `Σ_c ∂_c f dc`.
pub fn differential(
    ctx: &Arc<JetContext>,
    f: &CoeffExpr,
) -> Result<OneForm, SymbolicError> {
    ctx.check_expr(f)?;
    OneForm::new(
        ctx,
        ctx.roster()
            .into_iter()
            .map(|c| (c, f.partial(c, |atom, coord| ctx.depends(atom, coord)))),
    )
}

/// `i_Y Ω`, using `i_Y(da∧db) = Y_a db − Y_b da`.
pub fn interior_product(y: &VectorField, omega: &TwoForm) -> Result<OneForm, SymbolicError> {
    same_context(&y.ctx, &omega.ctx)?;
    let mut coeffs = BTreeMap::new();
    for ((a, b), e) in &omega.coeffs {
        accumulate(&mut coeffs, *b, e.mul(&y.component(*a)));
        accumulate(&mut coeffs, *a, e.mul(&y.component(*b)).neg());
    }
    Ok(OneForm {
        ctx: y.ctx.clone(),
        coeffs,
    })
}

/// The pairing `ω(Y) = Σ_b ω_b Y_b`.
pub fn evaluate_form(omega: &OneForm, y: &VectorField) -> Result<CoeffExpr, SymbolicError> {
    same_context(&omega.ctx, &y.ctx)?;
    Ok(omega
        .coeffs
        .iter()
        .fold(CoeffExpr::zero(), |acc, (c, e)| acc.add(&e.mul(&y.component(*c)))))
}

/// Evaluates a two-form on an ordered pair of fields.
pub fn evaluate_two_form(
    omega: &TwoForm,
    x: &VectorField,
    y: &VectorField,
) -> Result<CoeffExpr, SymbolicError> {
    evaluate_form(&interior_product(x, omega)?, y)
}

// Rendering. Covectors are listed with the s-slots first and dθ last so that
// a contact form prints as `ds_k − s_{k+1} dθ`.

fn display_order(c: &Coord) -> (u8, usize) {
    match c {
        Coord::S(k) => (0, *k),
        Coord::Theta => (1, 0),
    }
}

fn write_term(
    f: &mut fmt::Formatter<'_>,
    first: bool,
    coeff: &CoeffExpr,
    basis: &str,
) -> fmt::Result {
    let (neg, body) = if coeff.is_negative_monomial() {
        (true, coeff.neg())
    } else {
        (false, coeff.clone())
    };
    if first {
        if neg {
            write!(f, "−")?;
        }
    } else {
        write!(f, " {} ", if neg { "−" } else { "+" })?;
    }
    if body.is_one() {
        write!(f, "{basis}")
    } else if body.num_terms() == 1 {
        write!(f, "{body} {basis}")
    } else {
        write!(f, "({body}) {basis}")
    }
}

impl fmt::Display for OneForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut keys: Vec<&Coord> = self.coeffs.keys().collect();
        keys.sort_by_key(|c| display_order(c));
        for (i, c) in keys.into_iter().enumerate() {
            write_term(f, i == 0, &self.coeffs[c], &format!("d{}", c.symbol()))?;
        }
        Ok(())
    }
}

impl fmt::Display for TwoForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, ((a, b), e)) in self.coeffs.iter().enumerate() {
            write_term(f, i == 0, e, &format!("d{}∧d{}", a.symbol(), b.symbol()))?;
        }
        Ok(())
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.comps.is_empty() {
            return write!(f, "0");
        }
        for (i, (c, e)) in self.comps.iter().enumerate() {
            write_term(f, i == 0, e, &format!("∂/∂{}", c.symbol()))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(m: usize) -> Arc<JetContext> {
        JetContext::new(m).unwrap()
    }

    #[test]
    fn wedge_basis_and_sign() {
        let c = ctx(2);
        let dth = OneForm::basis(&c, Coord::Theta).unwrap();
        let ds2 = OneForm::basis(&c, Coord::S(2)).unwrap();
        assert!(wedge(&dth, &dth).unwrap().is_zero());
        let w = wedge(&dth, &ds2).unwrap();
        assert_eq!(w.coeff(Coord::Theta, Coord::S(2)), CoeffExpr::one());
        let back = wedge(&ds2, &dth).unwrap();
        assert_eq!(back, w.scale(&CoeffExpr::integer(-1)));
        assert_eq!(w.to_string(), "dθ∧ds₂");
    }

    #[test]
    fn exterior_derivative_small_cases() {
        let c = ctx(1);
        let dth = OneForm::basis(&c, Coord::Theta).unwrap();
        assert!(exterior_derivative(&dth).is_zero());

        let theta_ds0 = OneForm::new(&c, [(Coord::S(0), CoeffExpr::coord(Coord::Theta))]).unwrap();
        let d = exterior_derivative(&theta_ds0);
        let expect = TwoForm::new(&c, [(Coord::Theta, Coord::S(0), CoeffExpr::one())]).unwrap();
        assert_eq!(d, expect);
    }

    #[test]
    fn interior_product_basis_contractions() {
        let c = ctx(2);
        let w = TwoForm::new(&c, [(Coord::Theta, Coord::S(0), CoeffExpr::one())]).unwrap();
        let dth = VectorField::basis(&c, Coord::Theta).unwrap();
        assert_eq!(
            interior_product(&dth, &w).unwrap(),
            OneForm::basis(&c, Coord::S(0)).unwrap()
        );
        let w12 = TwoForm::new(&c, [(Coord::Theta, Coord::S(2), CoeffExpr::one())]).unwrap();
        let d1 = VectorField::basis(&c, Coord::S(1)).unwrap();
        assert!(interior_product(&d1, &w12).unwrap().is_zero());
    }

    #[test]
    fn context_mismatch_is_reported() {
        let a = OneForm::basis(&ctx(1), Coord::Theta).unwrap();
        let b = OneForm::basis(&ctx(2), Coord::Theta).unwrap();
        assert!(matches!(
            wedge(&a, &b),
            Err(SymbolicError::ContextMismatch { .. })
        ));
    }

    #[test]
    fn out_of_roster_coefficients_rejected() {
        let c = ctx(1);
        assert!(OneForm::basis(&c, Coord::S(2)).is_err());
        assert!(OneForm::new(&c, [(Coord::Theta, CoeffExpr::coord(Coord::S(5)))]).is_err());
        assert!(VectorField::new(&c, [(Coord::Theta, CoeffExpr::atom("g"))]).is_err());
    }

    #[test]
    fn differential_of_function_then_d_is_zero() {
        let c = JetContext::with_atoms(2, [("g", vec![Coord::Theta, Coord::S(1)])]).unwrap();
        let f = CoeffExpr::atom("g")
            .mul(&CoeffExpr::coord(Coord::S(0)))
            .add(&CoeffExpr::coord(Coord::Theta).pow(3));
        let df = differential(&c, &f).unwrap();
        assert!(exterior_derivative(&df).is_zero());
    }
}

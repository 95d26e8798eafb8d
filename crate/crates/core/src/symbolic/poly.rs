//! Exact multivariate polynomials over the rationals.
//!
//! Generators are the jet coordinates `θ, s₀, …, s_m` plus opaque atoms
//! (for example the right-hand side `g` of an ODE). Terms live in a
//! `BTreeMap` keyed by monomial, so two polynomials are equal iff their
//! canonical maps are equal.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// A base coordinate of a finite jet space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Coord {
    Theta,
    /// `s_k`, the k-th derivative slot (`s_0` is the section value).
    S(usize),
}

impl Coord {
    /// Name used by the pretty-printer, e.g. `θ` or `s₂`.
    pub fn symbol(&self) -> String {
        match self {
            Coord::Theta => "θ".to_string(),
            Coord::S(k) => format!("s{}", subscript(*k)),
        }
    }
}

/// An opaque scalar, possibly carrying formal partial derivatives.
///
/// `partials` is kept sorted so that mixed partials commute structurally.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomRef {
    pub name: String,
    pub partials: Vec<Coord>,
}

impl AtomRef {
    pub fn plain(name: impl Into<String>) -> Self {
        AtomRef {
            name: name.into(),
            partials: Vec::new(),
        }
    }

    fn differentiated(&self, c: Coord) -> Self {
        let mut partials = self.partials.clone();
        let pos = partials.partition_point(|p| *p <= c);
        partials.insert(pos, c);
        AtomRef {
            name: self.name.clone(),
            partials,
        }
    }
}

impl fmt::Display for AtomRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.partials.is_empty() {
            return write!(f, "{}", self.name);
        }
        let idx: Vec<String> = self.partials.iter().map(Coord::symbol).collect();
        write!(f, "{}_{{{}}}", self.name, idx.join(","))
    }
}

/// A polynomial generator.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Coord(Coord),
    Atom(AtomRef),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Coord(c) => write!(f, "{}", c.symbol()),
            Var::Atom(a) => write!(f, "{a}"),
        }
    }
}

/// Exponent map; absent generators have exponent zero.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(BTreeMap<Var, u32>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(BTreeMap::new())
    }

    pub fn var(v: Var) -> Self {
        let mut m = BTreeMap::new();
        m.insert(v, 1);
        Monomial(m)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.values().sum()
    }

    pub fn vars(&self) -> impl Iterator<Item = (&Var, u32)> {
        self.0.iter().map(|(v, e)| (v, *e))
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = self.0.clone();
        for (v, e) in &other.0 {
            *out.entry(v.clone()).or_insert(0) += e;
        }
        Monomial(out)
    }

    fn without(&self, v: &Var) -> (u32, Monomial) {
        let mut rest = self.0.clone();
        let e = rest.remove(v).unwrap_or(0);
        (e, Monomial(rest))
    }

    fn lowered(&self, v: &Var) -> Monomial {
        let mut out = self.0.clone();
        if let Some(e) = out.get_mut(v) {
            *e -= 1;
            if *e == 0 {
                out.remove(v);
            }
        }
        Monomial(out)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(v, e)| {
                if *e == 1 {
                    v.to_string()
                } else {
                    format!("{v}{}", superscript(*e))
                }
            })
            .collect();
        write!(f, "{}", parts.join("·"))
    }
}

/// Coefficient ring element: a canonical polynomial with exact rational
/// coefficients. Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct CoeffExpr {
    terms: BTreeMap<Monomial, BigRational>,
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl CoeffExpr {
    pub fn zero() -> Self {
        CoeffExpr::default()
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        let mut out = CoeffExpr::zero();
        out.add_term(Monomial::one(), c);
        out
    }

    pub fn integer(n: i64) -> Self {
        Self::constant(rational(n, 1))
    }

    pub fn var(v: Var) -> Self {
        let mut out = CoeffExpr::zero();
        out.add_term(Monomial::var(v), BigRational::one());
        out
    }

    pub fn coord(c: Coord) -> Self {
        Self::var(Var::Coord(c))
    }

    pub fn atom(name: impl Into<String>) -> Self {
        Self::var(Var::Atom(AtomRef::plain(name)))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .next()
                .is_some_and(|(m, c)| m.is_one() && c.is_one())
    }

    /// Constant value if the polynomial has no generators.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next()?;
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Every generator that appears with nonzero exponent.
    pub fn vars(&self) -> Vec<Var> {
        let mut out: Vec<Var> = self
            .terms
            .keys()
            .flat_map(|m| m.vars().map(|(v, _)| v.clone()))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add(&self, other: &CoeffExpr) -> CoeffExpr {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &CoeffExpr) -> CoeffExpr {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> CoeffExpr {
        CoeffExpr {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, k: &BigRational) -> CoeffExpr {
        let mut out = CoeffExpr::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * k);
        }
        out
    }

    pub fn mul(&self, other: &CoeffExpr) -> CoeffExpr {
        let mut out = CoeffExpr::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> CoeffExpr {
        (0..n).fold(CoeffExpr::one(), |acc, _| acc.mul(self))
    }

    /// Partial derivative with respect to a roster coordinate.
    ///
    /// `depends(atom, c)` says whether an atom varies with `c`; when it does,
    /// the chain rule produces the formal partial `atom_{…,c}`.
    pub fn partial<F>(&self, c: Coord, depends: F) -> CoeffExpr
    where
        F: Fn(&AtomRef, Coord) -> bool,
    {
        let cv = Var::Coord(c);
        let mut out = CoeffExpr::zero();
        for (m, coeff) in &self.terms {
            for (v, e) in m.vars() {
                let factor = rational(e as i64, 1);
                match v {
                    Var::Coord(_) if *v == cv => {
                        out.add_term(m.lowered(v), coeff * &factor);
                    }
                    Var::Atom(a) if depends(a, c) => {
                        let dm = m
                            .lowered(v)
                            .mul(&Monomial::var(Var::Atom(a.differentiated(c))));
                        out.add_term(dm, coeff * &factor);
                    }
                    _ => {}
                }
            }
        }
        out
    }

    /// Replace every occurrence of `v` by `replacement`.
    pub fn substitute(&self, v: &Var, replacement: &CoeffExpr) -> CoeffExpr {
        let mut out = CoeffExpr::zero();
        for (m, c) in &self.terms {
            let (e, rest) = m.without(v);
            let mut piece = CoeffExpr::zero();
            piece.add_term(rest, c.clone());
            out = out.add(&piece.mul(&replacement.pow(e)));
        }
        out
    }

    /// Evaluate with every generator bound to a float.
    pub fn eval_f64<F>(&self, value: F) -> f64
    where
        F: Fn(&Var) -> f64,
    {
        self.terms
            .iter()
            .map(|(m, c)| {
                let cf = rational_to_f64(c);
                m.vars()
                    .fold(cf, |acc, (v, e)| acc * value(v).powi(e as i32))
            })
            .sum()
    }

    /// True when the polynomial is a single term with negative coefficient.
    pub(crate) fn is_negative_monomial(&self) -> bool {
        self.terms.len() == 1 && self.terms.values().all(|c| c.is_negative())
    }
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

impl fmt::Display for CoeffExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "−")?;
                }
            } else {
                write!(f, " {} ", if neg { "−" } else { "+" })?;
            }
            match (m.is_one(), mag.is_one()) {
                (true, _) => write!(f, "{mag}")?,
                (false, true) => write!(f, "{m}")?,
                (false, false) => write!(f, "{mag}·{m}")?,
            }
        }
        Ok(())
    }
}

pub(crate) fn subscript(n: usize) -> String {
    const DIGITS: [char; 10] = ['₀', '₁', '₂', '₃', '₄', '₅', '₆', '₇', '₈', '₉'];
    n.to_string()
        .chars()
        .map(|d| DIGITS[d.to_digit(10).unwrap_or(0) as usize])
        .collect()
}

fn superscript(n: u32) -> String {
    const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    n.to_string()
        .chars()
        .map(|d| DIGITS[d.to_digit(10).unwrap_or(0) as usize])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(k: usize) -> CoeffExpr {
        CoeffExpr::coord(Coord::S(k))
    }

    #[test]
    fn cancellation_prunes_terms() {
        let p = s(1).add(&s(2)).sub(&s(1));
        assert_eq!(p, s(2));
        assert!(s(3).sub(&s(3)).is_zero());
    }

    #[test]
    fn multiplication_is_commutative_and_canonical() {
        let a = s(0).add(&CoeffExpr::coord(Coord::Theta));
        let b = s(1).sub(&CoeffExpr::integer(2));
        assert_eq!(a.mul(&b), b.mul(&a));
        assert_eq!(a.mul(&b).num_terms(), 4);
    }

    #[test]
    fn partial_of_coordinates_and_atoms() {
        let th = CoeffExpr::coord(Coord::Theta);
        let p = th.mul(&th).mul(&s(0));
        let dp = p.partial(Coord::Theta, |_, _| false);
        assert_eq!(dp, CoeffExpr::integer(2).mul(&th).mul(&s(0)));

        let g = CoeffExpr::atom("g");
        assert!(g.partial(Coord::S(0), |_, _| false).is_zero());
        let dg = g.partial(Coord::S(0), |_, _| true);
        let expect = CoeffExpr::var(Var::Atom(AtomRef {
            name: "g".into(),
            partials: vec![Coord::S(0)],
        }));
        assert_eq!(dg, expect);
    }

    #[test]
    fn mixed_atom_partials_commute() {
        let g = CoeffExpr::atom("g");
        let a = g
            .partial(Coord::Theta, |_, _| true)
            .partial(Coord::S(1), |_, _| true);
        let b = g
            .partial(Coord::S(1), |_, _| true)
            .partial(Coord::Theta, |_, _| true);
        assert_eq!(a, b);
    }

    #[test]
    fn substitution_replaces_powers() {
        let sigma = Var::Atom(AtomRef::plain("σ"));
        let p = CoeffExpr::var(sigma.clone()).pow(2).add(&s(0));
        let q = p.substitute(&sigma, &s(3));
        assert_eq!(q, s(3).mul(&s(3)).add(&s(0)));
    }

    #[test]
    fn display_uses_jet_notation() {
        let p = s(1).sub(&CoeffExpr::coord(Coord::Theta).scale(&rational(1, 2)));
        assert_eq!(p.to_string(), "−1/2·θ + s₁");
        assert_eq!(CoeffExpr::zero().to_string(), "0");
    }
}

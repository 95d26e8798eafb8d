//! Estimators `T(x)` for a target `ψ(θ)`, written in a small polynomial
//! language with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use super::FamilyError;
use crate::measures::QuadratureRule;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse polynomial {input:?} at byte {pos}: {message}")]
pub struct PolyParseError {
    pub input: String,
    pub pos: usize,
    pub message: String,
}

/// Univariate polynomial with rational coefficients, keyed by degree.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RationalPoly {
    coeffs: BTreeMap<u32, BigRational>,
}

impl RationalPoly {
    pub fn zero() -> Self {
        RationalPoly::default()
    }

    /// The polynomial `v` (degree one, unit coefficient).
    pub fn variable() -> Self {
        Self::monomial(BigRational::one(), 1)
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial(c, 0)
    }

    pub fn monomial(c: BigRational, degree: u32) -> Self {
        let mut p = RationalPoly::zero();
        p.add_term(degree, c);
        p
    }

    fn add_term(&mut self, degree: u32, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(degree).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(&degree);
        }
    }

    pub fn degree(&self) -> Option<u32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (u32, &BigRational)> {
        self.coeffs.iter().map(|(d, c)| (*d, c))
    }

    pub fn eval(&self, v: f64) -> f64 {
        // Horner over the dense coefficient range
        let Some(deg) = self.degree() else { return 0.0 };
        (0..=deg).rev().fold(0.0, |acc, d| {
            acc * v
                + self
                    .coeffs
                    .get(&d)
                    .map(|c| c.to_f64().unwrap_or(f64::NAN))
                    .unwrap_or(0.0)
        })
    }

    pub fn derivative(&self) -> RationalPoly {
        let mut out = RationalPoly::zero();
        for (d, c) in &self.coeffs {
            if *d > 0 {
                out.add_term(d - 1, c * BigRational::from_integer(BigInt::from(*d)));
            }
        }
        out
    }

    /// Parses e.g. `x^2 - 1`, `1/2*theta + 3`, `0.25 x`. Any single
    /// identifier is accepted as the variable, but only one per polynomial.
    pub fn parse(input: &str) -> Result<Self, PolyParseError> {
        Parser::new(input).parse()
    }

    /// Canonical rendering in the variable `var`, highest degree first.
    pub fn render(&self, var: &str) -> String {
        if self.coeffs.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (d, c)) in self.coeffs.iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let power = match d {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{d}"),
            };
            if *d == 0 {
                out.push_str(&mag.to_string());
            } else if mag.is_one() {
                out.push_str(&power);
            } else {
                out.push_str(&format!("{mag}*{power}"));
            }
        }
        out
    }
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    var: Option<String>,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            src,
            bytes: src.as_bytes(),
            pos: 0,
            var: None,
        }
    }

    fn err(&self, message: impl Into<String>) -> PolyParseError {
        PolyParseError {
            input: self.src.to_string(),
            pos: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn parse(mut self) -> Result<RationalPoly, PolyParseError> {
        let mut poly = RationalPoly::zero();
        let mut first = true;
        loop {
            let sign = match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    BigRational::one()
                }
                Some(b'-') => {
                    self.pos += 1;
                    -BigRational::one()
                }
                None if first => return Err(self.err("empty polynomial")),
                None => break,
                Some(_) if first => BigRational::one(),
                Some(c) => return Err(self.err(format!("expected + or -, found {:?}", c as char))),
            };
            first = false;
            let (c, d) = self.term()?;
            poly.add_term(d, sign * c);
        }
        Ok(poly)
    }

    /// term := factor ('*'? factor)*
    fn term(&mut self) -> Result<(BigRational, u32), PolyParseError> {
        let mut coeff = BigRational::one();
        let mut degree = 0u32;
        let mut any = false;
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_digit() || c == b'.' => {
                    coeff *= self.number()?;
                }
                Some(c) if c.is_ascii_alphabetic() => {
                    degree += self.power()?;
                }
                Some(b'*') if any => {
                    self.pos += 1;
                    match self.peek() {
                        Some(c) if c.is_ascii_alphanumeric() || c == b'.' => continue,
                        _ => return Err(self.err("expected a factor after '*'")),
                    }
                }
                _ if any => break,
                _ => return Err(self.err("expected a number or variable")),
            }
            any = true;
        }
        Ok((coeff, degree))
    }

    fn number(&mut self) -> Result<BigRational, PolyParseError> {
        let num = self.decimal()?;
        if self.peek() == Some(b'/') {
            self.pos += 1;
            self.skip_ws();
            let den = self.decimal()?;
            if den.is_zero() {
                return Err(self.err("division by zero"));
            }
            return Ok(num / den);
        }
        Ok(num)
    }

    fn decimal(&mut self) -> Result<BigRational, PolyParseError> {
        let start = self.pos;
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_digit() || self.bytes[self.pos] == b'.')
        {
            self.pos += 1;
        }
        let text = &self.src[start..self.pos];
        let (int, frac) = text.split_once('.').unwrap_or((text, ""));
        if (int.is_empty() && frac.is_empty()) || frac.contains('.') {
            return Err(self.err(format!("bad number {text:?}")));
        }
        let digits = format!("{int}{frac}");
        let n = BigInt::from_str(if digits.is_empty() { "0" } else { &digits })
            .map_err(|_| self.err(format!("bad number {text:?}")))?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        Ok(BigRational::new(n, den))
    }

    fn power(&mut self) -> Result<u32, PolyParseError> {
        let start = self.pos;
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = &self.src[start..self.pos];
        match &self.var {
            Some(v) if v != name => {
                return Err(self.err(format!("second variable {name:?} (already using {v:?})")))
            }
            None => self.var = Some(name.to_string()),
            _ => {}
        }
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let s = self.pos;
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            return self.src[s..self.pos]
                .parse()
                .map_err(|_| self.err("exponent must be a nonnegative integer"));
        }
        Ok(1)
    }
}

impl fmt::Display for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render("x"))
    }
}

/// Target functional `ψ(θ)` together with its derivative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Psi {
    Polynomial(RationalPoly),
    /// `ψ(θ) = 1/θ`.
    Reciprocal,
}

impl Psi {
    pub fn identity() -> Self {
        Psi::Polynomial(RationalPoly::variable())
    }

    pub fn value(&self, theta: f64) -> f64 {
        match self {
            Psi::Polynomial(p) => p.eval(theta),
            Psi::Reciprocal => 1.0 / theta,
        }
    }

    pub fn derivative(&self, theta: f64) -> f64 {
        match self {
            Psi::Polynomial(p) => p.derivative().eval(theta),
            Psi::Reciprocal => -1.0 / (theta * theta),
        }
    }

    /// `theta^2`, `identity`, `reciprocal`, or any polynomial in `theta`.
    pub fn parse(s: &str) -> Result<Self, PolyParseError> {
        match s.trim() {
            "identity" => Ok(Psi::identity()),
            "reciprocal" | "1/theta" => Ok(Psi::Reciprocal),
            other => RationalPoly::parse(other).map(Psi::Polynomial),
        }
    }

    pub fn render(&self) -> String {
        match self {
            Psi::Polynomial(p) => p.render("theta"),
            Psi::Reciprocal => "reciprocal".into(),
        }
    }
}

/// An estimator: statistic `T(x)` claimed unbiased for `ψ(θ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EstimatorSpec {
    pub name: String,
    pub statistic: RationalPoly,
    pub psi: Psi,
}

/// Relative tolerance of the load-time unbiasedness check.
pub const UNBIASED_TOL: f64 = 1e-8;

impl EstimatorSpec {
    pub fn new(name: impl Into<String>, statistic: RationalPoly, psi: Psi) -> Self {
        EstimatorSpec {
            name: name.into(),
            statistic,
            psi,
        }
    }

    pub fn statistic(&self, x: f64) -> f64 {
        self.statistic.eval(x)
    }

    /// `∫ T f dμ` on `rule`, compared with `ψ(θ)` at relative tolerance
    /// [`UNBIASED_TOL`]. Returns the computed mean.
    pub fn check_unbiased(
        &self,
        family: &dyn super::ParametricFamily,
        theta: f64,
        rule: &QuadratureRule,
    ) -> Result<f64, FamilyError> {
        let fx = rule
            .nodes
            .iter()
            .map(|&x| family.density(x, theta))
            .collect::<Result<Vec<_>, _>>()?;
        let mean = crate::measures::compensated_sum(
            rule.nodes
                .iter()
                .zip(&rule.weights)
                .zip(&fx)
                .map(|((&x, &w), &f)| w * self.statistic(x) * f),
        );
        let target = self.psi.value(theta);
        if (mean - target).abs() > UNBIASED_TOL * target.abs().max(1.0) {
            return Err(FamilyError::NotUnbiased {
                name: self.name.clone(),
                theta,
                mean,
                target,
            });
        }
        Ok(mean)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn parses_worked_examples() {
        let p = RationalPoly::parse("x^2 - 1").unwrap();
        assert_eq!(p.eval(3.0), 8.0);
        assert_eq!(p.render("x"), "x^2 - 1");
        let p = RationalPoly::parse("1/2*theta + 3").unwrap();
        assert_eq!(p.render("theta"), "1/2*theta + 3");
        let p = RationalPoly::parse("0.25 x - x + 2x^0").unwrap();
        assert_eq!(p.coeffs().collect::<Vec<_>>(), vec![(0, &q(2, 1)), (1, &q(-3, 4))]);
        assert_eq!(RationalPoly::parse("-x").unwrap().render("x"), "-x");
        assert_eq!(RationalPoly::parse("x - x").unwrap().render("x"), "0");
    }

    #[test]
    fn rejects_malformed_input() {
        for bad in ["", "x +", "x y", "2 ** x", "1/0", "x^-1", "1..2"] {
            assert!(RationalPoly::parse(bad).is_err(), "{bad}");
        }
        assert!(RationalPoly::parse("x + theta").is_err());
    }

    #[test]
    fn psi_forms() {
        let sq = Psi::parse("theta^2").unwrap();
        assert_eq!(sq.value(3.0), 9.0);
        assert_eq!(sq.derivative(3.0), 6.0);
        assert_eq!(Psi::parse("reciprocal").unwrap().derivative(2.0), -0.25);
        assert_eq!(Psi::parse("identity").unwrap(), Psi::identity());
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(
            terms in prop::collection::vec((-50i64..50, 1i64..20, 0u32..6), 0..6)
        ) {
            let mut p = RationalPoly::zero();
            for (n, d, deg) in terms {
                p.add_term(deg, q(n, d));
            }
            let text = p.render("x");
            let back = RationalPoly::parse(&text).unwrap();
            prop_assert_eq!(back, p);
        }
    }
}

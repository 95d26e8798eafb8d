//! Truncated power series in one variable, used for Taylor-mode
//! differentiation in the parameter `θ`.
//!
//! `coeffs[k]` is the k-th Taylor coefficient, so the k-th derivative is
//! `k! · coeffs[k]`.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    coeffs: Vec<f64>,
}

impl Series {
    /// Constant series truncated after `order`.
    pub fn constant(c: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = c;
        Series { coeffs }
    }

    /// The independent variable `θ + ε` expanded at `θ`.
    pub fn variable(theta: f64, order: usize) -> Self {
        let mut s = Self::constant(theta, order);
        if order >= 1 {
            s.coeffs[1] = 1.0;
        }
        s
    }

    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "series needs a constant term");
        Series { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// `∂^k` at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.coeffs.get(k).copied().unwrap_or(0.0) * fact
    }

    /// All derivatives `0..=order`.
    pub fn derivatives(&self) -> Vec<f64> {
        (0..=self.order()).map(|k| self.derivative(k)).collect()
    }

    pub fn scale(&self, k: f64) -> Series {
        Series {
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    pub fn add_scalar(&self, k: f64) -> Series {
        let mut out = self.clone();
        out.coeffs[0] += k;
        out
    }

    fn zip_with(&self, other: &Series, f: impl Fn(f64, f64) -> f64) -> Series {
        let n = self.coeffs.len().min(other.coeffs.len());
        Series {
            coeffs: (0..n).map(|k| f(self.coeffs[k], other.coeffs[k])).collect(),
        }
    }

    fn product(&self, other: &Series) -> Series {
        let n = self.coeffs.len().min(other.coeffs.len());
        let coeffs = (0..n)
            .map(|k| (0..=k).map(|j| self.coeffs[j] * other.coeffs[k - j]).sum())
            .collect();
        Series { coeffs }
    }

    /// `e^a` via `b' = a' b`.
    pub fn exp(&self) -> Series {
        let a = &self.coeffs;
        let n = a.len();
        let mut b = vec![0.0; n];
        b[0] = a[0].exp();
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| j as f64 * a[j] * b[k - j]).sum();
            b[k] = s / k as f64;
        }
        Series { coeffs: b }
    }

    /// `ln a` for a positive constant term, via `a b' = a'`.
    pub fn ln(&self) -> Series {
        let a = &self.coeffs;
        let n = a.len();
        let mut b = vec![0.0; n];
        b[0] = a[0].ln();
        for k in 1..n {
            let s: f64 = (1..k).map(|j| j as f64 * b[j] * a[k - j]).sum();
            b[k] = (a[k] - s / k as f64) / a[0];
        }
        Series { coeffs: b }
    }

    /// `√a` for a positive constant term, from `b² = a`:
    /// `b_k = (a_k − Σ_{j=1}^{k−1} b_j b_{k−j}) / (2 b_0)`.
    pub fn sqrt(&self) -> Series {
        let a = &self.coeffs;
        let n = a.len();
        let mut b = vec![0.0; n];
        b[0] = a[0].sqrt();
        for k in 1..n {
            let s: f64 = (1..k).map(|j| b[j] * b[k - j]).sum();
            b[k] = (a[k] - s) / (2.0 * b[0]);
        }
        Series { coeffs: b }
    }

    pub fn recip(&self) -> Series {
        let a = &self.coeffs;
        let n = a.len();
        let mut b = vec![0.0; n];
        b[0] = 1.0 / a[0];
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| a[j] * b[k - j]).sum();
            b[k] = -s / a[0];
        }
        Series { coeffs: b }
    }

    pub fn powi(&self, n: u32) -> Series {
        let mut out = Series::constant(1.0, self.order());
        for _ in 0..n {
            out = out.product(self);
        }
        out
    }

    /// Evaluate the truncated polynomial at offset `h`.
    pub fn eval(&self, h: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * h + c)
    }
}

impl Add for &Series {
    type Output = Series;
    fn add(self, rhs: &Series) -> Series {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Series {
    type Output = Series;
    fn sub(self, rhs: &Series) -> Series {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &Series {
    type Output = Series;
    fn mul(self, rhs: &Series) -> Series {
        self.product(rhs)
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exp_of_variable_has_exp_derivatives() {
        let e = Series::variable(0.3, 5).exp();
        for d in e.derivatives() {
            assert_relative_eq!(d, 0.3f64.exp(), max_relative = 1e-14);
        }
    }

    #[test]
    fn ln_and_exp_invert() {
        let a = Series::from_coeffs(vec![2.0, 0.5, -0.25, 0.125, 1.0]);
        let back = a.ln().exp();
        for (x, y) in back.coeffs().iter().zip(a.coeffs()) {
            assert_relative_eq!(x, y, max_relative = 1e-13, epsilon = 1e-15);
        }
    }

    #[test]
    fn sqrt_squares_back() {
        let a = Series::from_coeffs(vec![3.0, -1.0, 0.7, 0.2, -0.05, 0.01]);
        let r = a.sqrt();
        let sq = &r * &r;
        for (x, y) in sq.coeffs().iter().zip(a.coeffs()) {
            assert_relative_eq!(x, y, max_relative = 1e-13, epsilon = 1e-15);
        }
    }

    #[test]
    fn sqrt_of_variable_matches_closed_form() {
        // d^k/dθ^k √θ at θ = 4
        let d = Series::variable(4.0, 3).sqrt().derivatives();
        assert_relative_eq!(d[0], 2.0);
        assert_relative_eq!(d[1], 0.25);
        assert_relative_eq!(d[2], -1.0 / 32.0);
        assert_relative_eq!(d[3], 3.0 / 256.0);
    }

    #[test]
    fn recip_and_powi() {
        let a = Series::variable(2.0, 4);
        let r = &a.recip() * &a;
        assert_relative_eq!(r.value(), 1.0);
        assert!(r.coeffs()[1..].iter().all(|c| c.abs() < 1e-15));
        let cube = a.powi(3);
        assert_eq!(cube.derivatives(), vec![8.0, 12.0, 12.0, 6.0, 0.0]);
    }
}

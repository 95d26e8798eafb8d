//! Natural quintic splines in `θ` for tabulated densities.
//!
//! Each piece is `Σ_p a_p u^p` with `u = (t − t_j)/h_j`. The interpolant is
//! C⁴ at interior knots with `S''' = S'''' = 0` at both ends. The linear
//! system depends only on the knots, so it is factored once and reused for
//! every tabulated `x`.

use nalgebra::{DMatrix, DVector};

use super::FamilyError;

/// Fewest knots accepted.
pub const MIN_KNOTS: usize = 6;

#[derive(Clone, Debug)]
pub struct QuinticSpline {
    knots: Vec<f64>,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

/// Spline coefficients for one data vector.
#[derive(Clone, Debug, PartialEq)]
pub struct FittedSpline {
    knots: Vec<f64>,
    pieces: Vec<[f64; 6]>,
}

/// `p!/(p−k)!`, zero when `k > p`.
fn falling(p: usize, k: usize) -> f64 {
    if k > p {
        0.0
    } else {
        ((p - k + 1)..=p).map(|i| i as f64).product()
    }
}

fn parse_err(message: impl Into<String>) -> FamilyError {
    FamilyError::Parse {
        line: 0,
        message: message.into(),
    }
}

impl QuinticSpline {
    pub fn new(knots: &[f64]) -> Result<Self, FamilyError> {
        if knots.len() < MIN_KNOTS {
            return Err(parse_err(format!(
                "quintic spline needs at least {MIN_KNOTS} knots, got {}",
                knots.len()
            )));
        }
        if knots.iter().any(|t| !t.is_finite()) || knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(parse_err("spline knots must be finite and strictly increasing"));
        }
        let pieces = knots.len() - 1;
        let n = 6 * pieces;
        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        let mut a = DMatrix::<f64>::zeros(n, n);
        let mut row = 0;
        let col = |j: usize, p: usize| 6 * j + p;
        for j in 0..pieces {
            // interpolation at both ends of the piece
            a[(row, col(j, 0))] = 1.0;
            row += 1;
            for p in 0..6 {
                a[(row, col(j, p))] = 1.0;
            }
            row += 1;
        }
        // derivative continuity, scaled by h_j^k
        for j in 0..pieces - 1 {
            for k in 1..=4 {
                for p in k..6 {
                    a[(row, col(j, p))] = falling(p, k);
                }
                a[(row, col(j + 1, k))] = -falling(k, k) * (h[j] / h[j + 1]).powi(k as i32);
                row += 1;
            }
        }
        // natural ends
        for k in 3..=4 {
            a[(row, col(0, k))] = 1.0;
            row += 1;
            let last = pieces - 1;
            for p in k..6 {
                a[(row, col(last, p))] = falling(p, k);
            }
            row += 1;
        }
        debug_assert_eq!(row, n);
        let lu = a.lu();
        if !lu.is_invertible() {
            return Err(parse_err("spline system is singular"));
        }
        Ok(QuinticSpline {
            knots: knots.to_vec(),
            lu,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn fit(&self, values: &[f64]) -> Result<FittedSpline, FamilyError> {
        if values.len() != self.knots.len() {
            return Err(parse_err(format!(
                "expected {} values, got {}",
                self.knots.len(),
                values.len()
            )));
        }
        let pieces = self.knots.len() - 1;
        let mut rhs = DVector::<f64>::zeros(6 * pieces);
        for j in 0..pieces {
            rhs[2 * j] = values[j];
            rhs[2 * j + 1] = values[j + 1];
        }
        let sol = self
            .lu
            .solve(&rhs)
            .ok_or_else(|| parse_err("spline system is singular"))?;
        let pieces = (0..pieces)
            .map(|j| std::array::from_fn(|p| sol[6 * j + p]))
            .collect();
        Ok(FittedSpline {
            knots: self.knots.clone(),
            pieces,
        })
    }
}

impl FittedSpline {
    fn locate(&self, t: f64) -> usize {
        let last = self.pieces.len() - 1;
        match self.knots.partition_point(|k| *k <= t) {
            0 => 0,
            i => (i - 1).min(last),
        }
    }

    /// Derivatives `0..=order` at `t` (zero beyond the fifth).
    pub fn derivatives(&self, t: f64, order: usize) -> Vec<f64> {
        let j = self.locate(t);
        let h = self.knots[j + 1] - self.knots[j];
        let u = (t - self.knots[j]) / h;
        let a = &self.pieces[j];
        (0..=order)
            .map(|k| {
                let s: f64 = (k..6)
                    .rev()
                    .fold(0.0, |acc, p| acc * u + a[p] * falling(p, k));
                s / h.powi(k as i32)
            })
            .collect()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.derivatives(t, 0)[0]
    }
}

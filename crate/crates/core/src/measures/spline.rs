//! Natural cubic spline through tabulated points.

use crate::error::{input, Result};

#[derive(Clone, Debug)]
pub struct NaturalSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    // second derivatives at the knots
    ms: Vec<f64>,
}

impl NaturalSpline {
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return input("a table needs at least two points");
        }
        let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return input("table abscissae must be strictly increasing");
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return input("table values must be finite");
        }
        let n = xs.len();
        let mut ms = vec![0.0; n];
        if n > 2 {
            // tridiagonal system for interior second derivatives (Thomas algorithm)
            let m = n - 2;
            let mut diag = vec![0.0; m];
            let mut upper = vec![0.0; m];
            let mut rhs = vec![0.0; m];
            for i in 0..m {
                let h0 = xs[i + 1] - xs[i];
                let h1 = xs[i + 2] - xs[i + 1];
                diag[i] = 2.0 * (h0 + h1);
                upper[i] = h1;
                rhs[i] = 6.0 * ((ys[i + 2] - ys[i + 1]) / h1 - (ys[i + 1] - ys[i]) / h0);
            }
            for i in 1..m {
                let lower = xs[i + 1] - xs[i];
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            let mut sol = vec![0.0; m];
            sol[m - 1] = rhs[m - 1] / diag[m - 1];
            for i in (0..m - 1).rev() {
                sol[i] = (rhs[i] - upper[i] * sol[i + 1]) / diag[i];
            }
            ms[1..n - 1].copy_from_slice(&sol);
        }
        Ok(NaturalSpline { xs, ys, ms })
    }

    pub fn knots(&self) -> &[f64] {
        &self.xs
    }

    /// Value on knot interval `i` at offset `a` from its left knot and `b` from its right one.
    pub fn eval_segment(&self, i: usize, a: f64, b: f64) -> f64 {
        let h = self.xs[i + 1] - self.xs[i];
        let (m0, m1) = (self.ms[i], self.ms[i + 1]);
        (m0 * b * b * b + m1 * a * a * a) / (6.0 * h)
            + (self.ys[i] / h - m0 * h / 6.0) * b
            + (self.ys[i + 1] / h - m1 * h / 6.0) * a
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let i = match self.xs.binary_search_by(|k| k.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        };
        self.eval_segment(i, x - self.xs[i], self.xs[i + 1] - x)
    }
}

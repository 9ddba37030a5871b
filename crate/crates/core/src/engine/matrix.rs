//! `d × d` matrices over non-commutative polynomials and over scalars.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use super::functional::TraceFunctional;
use super::poly::NcPoly;
use crate::error::{input, Result};
use crate::scalar::Scalar;

/// Square matrix with polynomial entries, stored row-major.
#[derive(Clone, PartialEq)]
pub struct MatrixOverPoly<S> {
    d: usize,
    entries: Vec<NcPoly<S>>,
}

/// Square matrix with scalar entries.
#[derive(Clone, PartialEq, Debug)]
pub struct ScalarMatrix<S> {
    d: usize,
    entries: Vec<S>,
}

impl<S: Scalar> MatrixOverPoly<S> {
    pub fn zero(d: usize) -> Self {
        MatrixOverPoly { d, entries: vec![NcPoly::zero(); d * d] }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Self::zero(d);
        for i in 0..d {
            m.entries[i * d + i] = NcPoly::one();
        }
        m
    }

    /// Matrix unit `V_ij` (0-based indices).
    pub fn unit(d: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zero(d);
        m.entries[i * d + j] = NcPoly::one();
        m
    }

    pub fn from_entries(d: usize, entries: Vec<NcPoly<S>>) -> Result<Self> {
        if entries.len() != d * d {
            return input(format!("expected {} entries, got {}", d * d, entries.len()));
        }
        Ok(MatrixOverPoly { d, entries })
    }

    /// 1×1 matrix.
    pub fn scalar_poly(p: NcPoly<S>) -> Self {
        MatrixOverPoly { d: 1, entries: vec![p] }
    }

    pub fn from_scalar(m: &ScalarMatrix<S>) -> Self {
        MatrixOverPoly { d: m.d, entries: m.entries.iter().cloned().map(NcPoly::constant).collect() }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> &NcPoly<S> {
        &self.entries[i * self.d + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: NcPoly<S>) {
        self.entries[i * self.d + j] = p;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|p| p.is_zero())
    }

    pub fn degree(&self) -> usize {
        self.entries.iter().map(|p| p.degree()).max().unwrap_or(0)
    }

    pub fn adjoint(&self) -> Self {
        let d = self.d;
        let mut m = Self::zero(d);
        for i in 0..d {
            for j in 0..d {
                m.entries[j * d + i] = self.entries[i * d + j].adjoint();
            }
        }
        m
    }

    pub fn scale(&self, c: &S) -> Self {
        MatrixOverPoly { d: self.d, entries: self.entries.iter().map(|p| p.scale(c)).collect() }
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::identity(self.d), |acc, _| &acc * self)
    }

    fn check_dim(&self, other: &Self) {
        assert_eq!(self.d, other.d, "matrix dimension mismatch");
    }

    /// `φ_d(X) = (1/d) Σ_i φ(x_ii)`.
    pub fn trace(&self, f: &TraceFunctional<S>) -> Result<S> {
        let mut acc = S::zero();
        for i in 0..self.d {
            acc = acc + f.evaluate_poly(self.get(i, i))?;
        }
        Ok(acc * S::ratio(1, self.d as i64))
    }

    /// Entrywise expectation, the conditional expectation onto `M_d(C)`.
    pub fn expectation_m(&self, f: &TraceFunctional<S>) -> Result<ScalarMatrix<S>> {
        let entries = self.entries.iter().map(|p| f.evaluate_poly(p)).collect::<Result<Vec<_>>>()?;
        Ok(ScalarMatrix { d: self.d, entries })
    }

    /// Conditional expectation onto the diagonal scalar matrices.
    pub fn expectation_d(&self, f: &TraceFunctional<S>) -> Result<ScalarMatrix<S>> {
        let mut m = ScalarMatrix::zero(self.d);
        for i in 0..self.d {
            m.set(i, i, f.evaluate_poly(self.get(i, i))?);
        }
        Ok(m)
    }
}

impl<S: Scalar> fmt::Debug for MatrixOverPoly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.d {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.d {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
        }
        write!(f, "]")
    }
}

impl<S: Scalar> Mul for &MatrixOverPoly<S> {
    type Output = MatrixOverPoly<S>;
    fn mul(self, rhs: &MatrixOverPoly<S>) -> MatrixOverPoly<S> {
        self.check_dim(rhs);
        let d = self.d;
        let mut out = MatrixOverPoly::zero(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    let b = rhs.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let e = &mut out.entries[i * d + j];
                    *e = &*e + &(a * b);
                }
            }
        }
        out
    }
}

impl<S: Scalar> Add for &MatrixOverPoly<S> {
    type Output = MatrixOverPoly<S>;
    fn add(self, rhs: &MatrixOverPoly<S>) -> MatrixOverPoly<S> {
        self.check_dim(rhs);
        MatrixOverPoly { d: self.d, entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect() }
    }
}

impl<S: Scalar> Sub for &MatrixOverPoly<S> {
    type Output = MatrixOverPoly<S>;
    fn sub(self, rhs: &MatrixOverPoly<S>) -> MatrixOverPoly<S> {
        self.check_dim(rhs);
        MatrixOverPoly { d: self.d, entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect() }
    }
}

/// `[[0, a], [a*, 0]]`.
pub fn block_embed<S: Scalar>(a: &NcPoly<S>) -> MatrixOverPoly<S> {
    let mut m = MatrixOverPoly::zero(2);
    m.set(0, 1, a.clone());
    m.set(1, 0, a.adjoint());
    m
}

impl<S: Scalar> ScalarMatrix<S> {
    pub fn zero(d: usize) -> Self {
        ScalarMatrix { d, entries: vec![S::zero(); d * d] }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Self::zero(d);
        for i in 0..d {
            m.set(i, i, S::one());
        }
        m
    }

    pub fn unit(d: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zero(d);
        m.set(i, j, S::one());
        m
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return input("scalar matrix must be square");
        }
        Ok(ScalarMatrix { d, entries: rows.into_iter().flatten().collect() })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.entries[i * self.d + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.entries[i * self.d + j] = v;
    }

    pub fn entries(&self) -> &[S] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|v| v.is_zero())
    }

    /// Normalized trace `(1/d) Σ m_ii`.
    pub fn trace(&self) -> S {
        let mut acc = S::zero();
        for i in 0..self.d {
            acc = acc + self.get(i, i).clone();
        }
        acc * S::ratio(1, self.d as i64)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn adjoint(&self) -> Self {
        let d = self.d;
        let mut m = Self::zero(d);
        for i in 0..d {
            for j in 0..d {
                m.set(j, i, self.get(i, j).conj());
            }
        }
        m
    }

    /// The diagonal part.
    pub fn diagonal(&self) -> Self {
        let mut m = Self::zero(self.d);
        for i in 0..self.d {
            m.set(i, i, self.get(i, i).clone());
        }
        m
    }
}

impl<S: Scalar> Mul for &ScalarMatrix<S> {
    type Output = ScalarMatrix<S>;
    fn mul(self, rhs: &ScalarMatrix<S>) -> ScalarMatrix<S> {
        assert_eq!(self.d, rhs.d, "matrix dimension mismatch");
        let d = self.d;
        let mut out = ScalarMatrix::<S>::zero(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    let v = out.get(i, j).clone() + a.clone() * rhs.get(k, j).clone();
                    out.set(i, j, v);
                }
            }
        }
        out
    }
}

impl<S: Scalar> Add for &ScalarMatrix<S> {
    type Output = ScalarMatrix<S>;
    fn add(self, rhs: &ScalarMatrix<S>) -> ScalarMatrix<S> {
        assert_eq!(self.d, rhs.d, "matrix dimension mismatch");
        ScalarMatrix { d: self.d, entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a.clone() + b.clone()).collect() }
    }
}

/// `η(x) = [[x22, 0], [0, x11]]` on 2×2 scalar matrices.
pub fn eta<S: Scalar>(m: &ScalarMatrix<S>) -> Result<ScalarMatrix<S>> {
    if m.d != 2 {
        return input(format!("η needs a 2×2 matrix, got {}×{}", m.d, m.d));
    }
    let mut out = ScalarMatrix::zero(2);
    out.set(0, 0, m.get(1, 1).clone());
    out.set(1, 1, m.get(0, 0).clone());
    Ok(out)
}

/// `η₀` on the diagonal algebra: swaps the two diagonal entries.
pub fn eta0<S: Scalar>(m: &ScalarMatrix<S>) -> Result<ScalarMatrix<S>> {
    if m.d != 2 {
        return input(format!("η₀ needs a 2×2 matrix, got {}×{}", m.d, m.d));
    }
    if !m.get(0, 1).is_zero() || !m.get(1, 0).is_zero() {
        return input("η₀ is defined on diagonal matrices only");
    }
    eta(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::CompactMeasure;
    use crate::scalar::Gaussian;
    use crate::engine::functional::rdiagonal_functional;

    fn g(n: i64) -> Gaussian {
        Gaussian::from_i64(n)
    }

    #[test]
    fn block_embedding_moments() {
        let f = rdiagonal_functional::<Gaussian>(&CompactMeasure::quartercircle(4.0).unwrap()).unwrap();
        let a = block_embed(&NcPoly::gen("a"));
        assert_eq!(a.pow(2).trace(&f).unwrap(), g(1));
        assert_eq!(a.pow(3).trace(&f).unwrap(), g(0));
        assert_eq!(a.pow(4).trace(&f).unwrap(), g(2));
        assert!(a.expectation_d(&f).unwrap().is_zero());
        assert_eq!(a.adjoint(), a);
    }

    #[test]
    fn units_and_eta() {
        let f = TraceFunctional::<Gaussian>::builder().build().unwrap();
        assert_eq!(MatrixOverPoly::<Gaussian>::unit(2, 0, 0).trace(&f).unwrap(), Gaussian::ratio(1, 2));
        let m = ScalarMatrix::from_rows(vec![vec![g(1), g(2)], vec![g(3), g(4)]]).unwrap();
        let e = eta(&m).unwrap();
        assert_eq!(e, ScalarMatrix::from_rows(vec![vec![g(4), g(0)], vec![g(0), g(1)]]).unwrap());
        assert!(eta(&ScalarMatrix::<Gaussian>::identity(3)).is_err());
        assert!(eta0(&m).is_err());
        assert_eq!(eta0(&m.diagonal()).unwrap(), e);
    }

    #[test]
    fn adjoint_reverses_products() {
        let x = MatrixOverPoly::<Gaussian>::from_entries(2, vec![NcPoly::gen("a"), NcPoly::gen("b"), NcPoly::zero(), NcPoly::gen("a").adjoint()]).unwrap();
        let y = MatrixOverPoly::from_entries(2, vec![NcPoly::gen("b"), NcPoly::one(), NcPoly::gen("a"), NcPoly::zero()]).unwrap();
        assert_eq!((&x * &y).adjoint(), &y.adjoint() * &x.adjoint());
    }
}

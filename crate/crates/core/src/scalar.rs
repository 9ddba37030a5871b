//! Scalar fields used by the moment engine.
//!
//! Exact computations run over Gaussian rationals, floating ones over
//! `Complex64`. Both implement [`Scalar`].

use std::fmt::{Debug, Display};
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Gaussian rational `p + i q` with `p, q` rational.
pub type Gaussian = Complex<BigRational>;

pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// True for exact arithmetic.
    const EXACT: bool;

    fn from_rational(r: &BigRational) -> Self;
    /// Exact binary value of `x` in exact mode.
    fn from_f64(x: f64) -> Self;
    fn imag_unit() -> Self;
    fn conj(&self) -> Self;
    fn to_c64(&self) -> Complex64;
    /// Multiplicative inverse, `None` for zero.
    fn inv(&self) -> Option<Self>;

    /// Absolute tolerance used when deciding whether a value vanishes.
    fn tolerance() -> f64 {
        if Self::EXACT {
            0.0
        } else {
            1e-9
        }
    }

    fn from_i64(n: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(n)))
    }

    fn ratio(p: i64, q: i64) -> Self {
        Self::from_rational(&BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    fn abs(&self) -> f64 {
        self.to_c64().norm()
    }

    fn is_negligible(&self) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.abs() <= Self::tolerance()
        }
    }
}

impl Scalar for Gaussian {
    const EXACT: bool = true;

    fn from_rational(r: &BigRational) -> Self {
        Complex::new(r.clone(), BigRational::zero())
    }

    fn from_f64(x: f64) -> Self {
        let r = BigRational::from_float(x).expect("finite float");
        Complex::new(r, BigRational::zero())
    }

    fn imag_unit() -> Self {
        Complex::new(BigRational::zero(), BigRational::one())
    }

    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = &self.re * &self.re + &self.im * &self.im;
        Some(Complex::new(&self.re / &n, -(&self.im / &n)))
    }
}

impl Scalar for Complex64 {
    const EXACT: bool = false;

    fn from_rational(r: &BigRational) -> Self {
        Complex64::new(r.to_f64().unwrap_or(f64::NAN), 0.0)
    }

    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }

    fn imag_unit() -> Self {
        Complex64::new(0.0, 1.0)
    }

    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn to_c64(&self) -> Complex64 {
        *self
    }

    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(Complex64::new(1.0, 0.0) / self)
        }
    }
}

/// Rational `p/q` as a `BigRational`.
pub fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Exact rational value of a finite float.
pub fn rat_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

/// Catalan number `C_n` as a big integer.
pub fn catalan(n: usize) -> BigInt {
    let mut c = BigInt::one();
    for k in 0..n {
        c = c * BigInt::from(2 * (2 * k + 1)) / BigInt::from(k + 2);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalan_values() {
        let v: Vec<i64> = (0..8).map(|n| catalan(n).to_i64().unwrap()).collect();
        assert_eq!(v, vec![1, 1, 2, 5, 14, 42, 132, 429]);
    }

    #[test]
    fn gaussian_inverse() {
        let z = Gaussian::new(rat(1, 2), rat(-3, 4));
        assert_eq!(z.clone() * Scalar::inv(&z).unwrap(), Gaussian::one());
        assert!(Scalar::inv(&Gaussian::zero()).is_none());
    }

    #[test]
    fn float_import_is_exact() {
        let x = <Gaussian as Scalar>::from_f64(0.1);
        assert_ne!(x.re, rat(1, 10));
        assert_eq!(x.to_c64().re, 0.1);
    }
}

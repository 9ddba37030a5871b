//! Non-commutative polynomials: finite linear combinations of words.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::word::{Letter, Symbol, Word};
use crate::scalar::Scalar;

#[derive(Clone, PartialEq)]
pub struct NcPoly<S> {
    terms: BTreeMap<Word, S>,
}

impl<S: Scalar> NcPoly<S> {
    pub fn zero() -> Self {
        NcPoly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::constant(S::one())
    }

    pub fn constant(c: S) -> Self {
        Self::monomial(Word::empty(), c)
    }

    pub fn monomial(w: Word, c: S) -> Self {
        let mut p = Self::zero();
        p.add_term(w, c);
        p
    }

    pub fn word(w: Word) -> Self {
        Self::monomial(w, S::one())
    }

    /// The generator `name` (unstarred).
    pub fn gen(name: &str) -> Self {
        Self::word(Word::letter(Symbol::new(name), false))
    }

    pub fn letter(l: Letter) -> Self {
        Self::word(Word::from_letters([l]))
    }

    pub fn add_term(&mut self, w: Word, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&w) {
            Some(v) => {
                let s = v.clone() + c;
                if s.is_zero() {
                    self.terms.remove(&w);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(w, c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &S)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, w: &Word) -> S {
        self.terms.get(w).cloned().unwrap_or_else(S::zero)
    }

    pub fn constant_term(&self) -> S {
        self.coefficient(&Word::empty())
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|w| w.len()).max().unwrap_or(0)
    }

    pub fn generators(&self) -> Vec<Symbol> {
        let mut g: Vec<Symbol> = self.terms.keys().flat_map(|w| w.letters().iter().map(|l| l.gen)).collect();
        g.sort();
        g.dedup();
        g
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut p = Self::zero();
        for (w, v) in &self.terms {
            p.add_term(w.clone(), v.clone() * c.clone());
        }
        p
    }

    /// Adjoint: reverse words, flip stars, conjugate coefficients.
    pub fn adjoint(&self) -> Self {
        let mut p = Self::zero();
        for (w, v) in &self.terms {
            p.add_term(w.adjoint(), v.conj());
        }
        p
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Replace each generator by a polynomial (letters starred in the word
    /// are replaced by the adjoint of the image).
    pub fn substitute(&self, image: &impl Fn(Symbol) -> Option<NcPoly<S>>) -> Option<Self> {
        let mut out = Self::zero();
        for (w, c) in &self.terms {
            let mut term = Self::constant(c.clone());
            for l in w.letters() {
                let img = image(l.gen)?;
                let img = if l.star { img.adjoint() } else { img };
                term = &term * &img;
            }
            out = out + term;
        }
        Some(out)
    }
}

impl<S: Scalar> fmt::Debug for NcPoly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<S: Scalar> fmt::Display for NcPoly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if c.is_one() {
                write!(f, "{w}")?;
            } else if w.is_empty() {
                write!(f, "({c})")?;
            } else {
                write!(f, "({c})·{w}")?;
            }
        }
        Ok(())
    }
}

impl<S: Scalar> Add for NcPoly<S> {
    type Output = NcPoly<S>;
    fn add(mut self, rhs: NcPoly<S>) -> NcPoly<S> {
        for (w, c) in rhs.terms {
            self.add_term(w, c);
        }
        self
    }
}

impl<S: Scalar> Add for &NcPoly<S> {
    type Output = NcPoly<S>;
    fn add(self, rhs: &NcPoly<S>) -> NcPoly<S> {
        self.clone() + rhs.clone()
    }
}

impl<S: Scalar> Neg for NcPoly<S> {
    type Output = NcPoly<S>;
    fn neg(self) -> NcPoly<S> {
        NcPoly { terms: self.terms.into_iter().map(|(w, c)| (w, -c)).collect() }
    }
}

impl<S: Scalar> Sub for NcPoly<S> {
    type Output = NcPoly<S>;
    fn sub(self, rhs: NcPoly<S>) -> NcPoly<S> {
        self + (-rhs)
    }
}

impl<S: Scalar> Sub for &NcPoly<S> {
    type Output = NcPoly<S>;
    fn sub(self, rhs: &NcPoly<S>) -> NcPoly<S> {
        self.clone() - rhs.clone()
    }
}

impl<S: Scalar> Mul for &NcPoly<S> {
    type Output = NcPoly<S>;
    fn mul(self, rhs: &NcPoly<S>) -> NcPoly<S> {
        let mut p = NcPoly::zero();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &rhs.terms {
                p.add_term(w1.concat(w2), c1.clone() * c2.clone());
            }
        }
        p
    }
}

impl<S: Scalar> Mul for NcPoly<S> {
    type Output = NcPoly<S>;
    fn mul(self, rhs: NcPoly<S>) -> NcPoly<S> {
        &self * &rhs
    }
}

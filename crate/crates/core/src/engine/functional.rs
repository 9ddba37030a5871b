//! Tracial functionals on free products of sources.
//!
//! A [`TraceFunctional`] is the free product of finitely many sources, each
//! owning a set of generators. Words are evaluated by the centering
//! recursion: the word is cut into maximal single-source blocks, every block
//! is written as its mean plus a centered part, and the alternating product
//! of centered parts is dropped.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;

use super::poly::NcPoly;
use super::word::{Letter, Symbol, Word};
use crate::error::{input, Error, Result};
use crate::measures::CompactMeasure;
use crate::scalar::{catalan, Gaussian, Scalar};

/// Default bound on evaluated word length.
pub const DEFAULT_MAX_DEGREE: usize = 12;

/// How the polar part of an R-diagonal element is realized internally.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RDiagonalRepr {
    /// `a = u p` with `p` symmetric, distributed as the symmetric square root of `ν`.
    Symmetric,
    /// `a = u p v` with two free Haar unitaries and symmetric `p`.
    TwoSided,
    /// `a = u p` with `p = √(a*a) ≥ 0` (floating point only).
    Positive,
}

pub enum SourceKind<S> {
    /// Selfadjoint generator with `φ(x^n) = moments[n]`.
    Moments { gen: Symbol, moments: Arc<Vec<S>> },
    /// Haar unitary: `φ(u^n) = δ_{n,0}`.
    Haar { gen: Symbol },
    /// Explicit table of word values.
    Table { table: HashMap<Word, S> },
    /// Generators realized as polynomials in another functional.
    Nested { images: BTreeMap<Symbol, NcPoly<S>>, inner: Arc<TraceFunctional<S>> },
}

pub struct Source<S> {
    pub name: String,
    pub gens: Vec<Symbol>,
    /// Invariant under `x -> e^{iθ} x` for every generator of the source.
    pub gauge_invariant: bool,
    pub kind: SourceKind<S>,
}

impl<S: Scalar> Source<S> {
    /// Canonical form of a single-source block; `None` means the block is the unit.
    fn canonical(&self, block: &[Letter]) -> Option<Word> {
        match &self.kind {
            SourceKind::Haar { gen } => {
                let n: i64 = block.iter().map(|l| if l.star { -1 } else { 1 }).sum();
                if n == 0 {
                    None
                } else {
                    Some(Word::from_letters((0..n.unsigned_abs()).map(|_| Letter::new(*gen, n < 0))))
                }
            }
            SourceKind::Moments { gen, .. } => Some(Word::from_letters(block.iter().map(|_| Letter::new(*gen, false)))),
            _ => Some(Word::from_letters(block.iter().copied())),
        }
    }

    fn charge(&self, block: &[Letter]) -> i64 {
        block.iter().map(|l| if l.star { -1 } else { 1 }).sum()
    }

    /// Value of a word made of this source's letters only.
    pub(crate) fn eval_block(&self, w: &Word, cumulant_path: bool) -> Result<S> {
        match &self.kind {
            SourceKind::Moments { moments, .. } => moments.get(w.len()).cloned().ok_or_else(|| {
                Error::Resource(format!("source `{}` has moments up to order {} only", self.name, moments.len() - 1))
            }),
            SourceKind::Haar { .. } => Ok(if self.charge(w.letters()) == 0 { S::one() } else { S::zero() }),
            SourceKind::Table { table } => {
                if w.is_empty() {
                    return Ok(S::one());
                }
                table.get(w).cloned().ok_or_else(|| Error::MissingWord(w.to_string()))
            }
            SourceKind::Nested { images, inner } => {
                let p = NcPoly::word(w.clone())
                    .substitute(&|g| images.get(&g).cloned())
                    .ok_or_else(|| Error::UnknownGenerator(w.to_string()))?;
                if cumulant_path {
                    inner.cumulant_evaluate_poly(&p)
                } else {
                    inner.evaluate_poly_unbounded(&p)
                }
            }
        }
    }
}

/// A tracial state on the free product of its sources.
pub struct TraceFunctional<S> {
    sources: Vec<Source<S>>,
    index: HashMap<Symbol, usize>,
    max_degree: usize,
    cache: RwLock<HashMap<Word, S>>,
    label: String,
}

impl<S: Scalar> fmt::Debug for TraceFunctional<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TraceFunctional")
            .field("label", &self.label)
            .field("sources", &self.sources.iter().map(|s| s.name.as_str()).collect::<Vec<_>>())
            .field("exact", &S::EXACT)
            .finish()
    }
}

/// Moments `m_0..m_upto` of a measure in the requested scalar field.
pub fn measure_moments<S: Scalar>(mu: &CompactMeasure, upto: usize) -> Result<Vec<S>> {
    if let Some(ex) = mu.exact_moments(upto) {
        return Ok(ex.iter().map(S::from_rational).collect());
    }
    if S::EXACT {
        return input(format!("measure `{}` has no exact moments; use floating-point mode", mu.label()));
    }
    (0..=upto).map(|k| mu.moment(k).map(S::from_f64)).collect()
}

/// Moments of a semicircular element of variance `v`.
pub fn semicircle_moments<S: Scalar>(v: &S, upto: usize) -> Vec<S> {
    let mut out = Vec::with_capacity(upto + 1);
    let mut vp = S::one();
    for k in 0..=upto {
        if k % 2 == 1 {
            out.push(S::zero());
        } else {
            out.push(S::from_rational(&BigRational::from_integer(catalan(k / 2))) * vp.clone());
            vp = vp * v.clone();
        }
    }
    out
}

pub struct FunctionalBuilder<S> {
    sources: Vec<Source<S>>,
    max_degree: usize,
    moment_order: usize,
    label: String,
}

impl<S: Scalar> Default for FunctionalBuilder<S> {
    fn default() -> Self {
        FunctionalBuilder { sources: Vec::new(), max_degree: DEFAULT_MAX_DEGREE, moment_order: 40, label: String::new() }
    }
}

impl<S: Scalar> FunctionalBuilder<S> {
    pub fn max_degree(mut self, d: usize) -> Self {
        self.max_degree = d;
        self
    }

    /// Highest moment order stored for measure sources.
    pub fn moment_order(mut self, k: usize) -> Self {
        self.moment_order = k;
        self
    }

    pub fn label(mut self, l: impl Into<String>) -> Self {
        self.label = l.into();
        self
    }

    pub fn source(mut self, s: Source<S>) -> Self {
        self.sources.push(s);
        self
    }

    /// Selfadjoint generator with prescribed moments `m_0, m_1, ...`.
    pub fn moments(self, name: &str, moments: Vec<S>) -> Self {
        let gen = Symbol::new(name);
        self.source(Source {
            name: name.into(),
            gens: vec![gen],
            gauge_invariant: false,
            kind: SourceKind::Moments { gen, moments: Arc::new(moments) },
        })
    }

    /// Selfadjoint generator distributed as `mu`.
    pub fn measure(self, name: &str, mu: &CompactMeasure) -> Result<Self> {
        let m = measure_moments(mu, self.moment_order)?;
        Ok(self.moments(name, m))
    }

    pub fn semicircular(self, name: &str, variance: S) -> Self {
        let m = semicircle_moments(&variance, self.moment_order);
        self.moments(name, m)
    }

    /// Projection of trace `t`.
    pub fn projection(self, name: &str, trace: S) -> Self {
        let mut m = vec![trace; self.moment_order + 1];
        m[0] = S::one();
        self.moments(name, m)
    }

    pub fn haar(self, name: &str) -> Self {
        let gen = Symbol::new(name);
        self.source(Source { name: name.into(), gens: vec![gen], gauge_invariant: true, kind: SourceKind::Haar { gen } })
    }

    /// Generators `names` with an explicit table of word values.
    pub fn table(self, names: &[&str], table: HashMap<Word, S>) -> Self {
        let gens = names.iter().map(|n| Symbol::new(n)).collect();
        self.source(Source { name: names.join(","), gens, gauge_invariant: false, kind: SourceKind::Table { table } })
    }

    /// Generators given as polynomials over an inner functional.
    pub fn nested(self, name: &str, images: Vec<(&str, NcPoly<S>)>, inner: TraceFunctional<S>, gauge_invariant: bool) -> Self {
        let images: BTreeMap<Symbol, NcPoly<S>> = images.into_iter().map(|(n, p)| (Symbol::new(n), p)).collect();
        let gens = images.keys().copied().collect();
        self.source(Source {
            name: name.into(),
            gens,
            gauge_invariant,
            kind: SourceKind::Nested { images, inner: Arc::new(inner) },
        })
    }

    /// R-diagonal generator with `a*a` distributed as `ν`, given through the
    /// moments `ν_0, ν_1, ...`.
    pub fn rdiagonal_from_moments(self, name: &str, nu: &[S], repr: RDiagonalRepr) -> Result<Self> {
        if repr == RDiagonalRepr::Positive {
            return input("the positive polar representation needs a measure (half moments)");
        }
        let order = 2 * (nu.len() - 1);
        let p_moments: Vec<S> = (0..=order).map(|k| if k % 2 == 1 { S::zero() } else { nu[k / 2].clone() }).collect();
        self.rdiagonal_with_polar(name, p_moments, repr)
    }

    /// R-diagonal generator with `a*a` distributed as `ν`.
    pub fn rdiagonal(self, name: &str, nu: &CompactMeasure, repr: RDiagonalRepr) -> Result<Self> {
        if !nu.is_supported_on_nonnegative() {
            return input("R-diagonal construction needs ν on [0, ∞)");
        }
        match repr {
            RDiagonalRepr::Positive => {
                if S::EXACT {
                    return input("the positive polar representation has irrational moments; use floating-point mode");
                }
                let order = self.moment_order;
                let m = (0..=order).map(|k| nu.abs_moment(0.5 * k as f64).map(S::from_f64)).collect::<Result<Vec<_>>>()?;
                self.rdiagonal_with_polar(name, m, repr)
            }
            _ => {
                let nu_m = measure_moments::<S>(nu, self.moment_order / 2)?;
                self.rdiagonal_from_moments(name, &nu_m, repr)
            }
        }
    }

    fn rdiagonal_with_polar(self, name: &str, p_moments: Vec<S>, repr: RDiagonalRepr) -> Result<Self> {
        let (u, p, v) = (format!("{name}.u"), format!("{name}.p"), format!("{name}.v"));
        let mut inner = TraceFunctional::builder().max_degree(usize::MAX).haar(&u).moments(&p, p_moments);
        let mut image = &NcPoly::gen(&u) * &NcPoly::gen(&p);
        if repr == RDiagonalRepr::TwoSided {
            inner = inner.haar(&v);
            image = &image * &NcPoly::gen(&v);
        }
        let inner = inner.label(format!("polar({name})")).build()?;
        Ok(self.nested(name, vec![(name, image)], inner, true))
    }

    /// Circular element of variance `v` (R-diagonal with quarter-circle `a*a`).
    pub fn circular(self, name: &str, variance: S) -> Result<Self> {
        let order = self.moment_order / 2;
        let nu: Vec<S> = semicircle_moments(&variance, 2 * order).into_iter().step_by(2).collect();
        self.rdiagonal_from_moments(name, &nu, RDiagonalRepr::Symmetric)
    }

    pub fn build(self) -> Result<TraceFunctional<S>> {
        let mut index = HashMap::new();
        for (i, s) in self.sources.iter().enumerate() {
            for g in &s.gens {
                if index.insert(*g, i).is_some() {
                    return input(format!("duplicate generator `{g}`"));
                }
            }
        }
        let label = if self.label.is_empty() {
            self.sources.iter().map(|s| s.name.as_str()).collect::<Vec<_>>().join(" * ")
        } else {
            self.label
        };
        Ok(TraceFunctional { sources: self.sources, index, max_degree: self.max_degree, cache: RwLock::new(HashMap::new()), label })
    }
}

struct Block {
    src: usize,
    word: Word,
}

impl<S: Scalar> TraceFunctional<S> {
    pub fn builder() -> FunctionalBuilder<S> {
        FunctionalBuilder::default()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn sources(&self) -> &[Source<S>] {
        &self.sources
    }

    pub fn generators(&self) -> Vec<Symbol> {
        let mut g: Vec<Symbol> = self.index.keys().copied().collect();
        g.sort();
        g
    }

    pub fn has_generator(&self, name: &str) -> bool {
        self.index.contains_key(&Symbol::new(name))
    }

    pub(crate) fn source_of(&self, g: Symbol) -> Result<usize> {
        self.index.get(&g).copied().ok_or_else(|| Error::UnknownGenerator(g.to_string()))
    }

    pub fn cache_len(&self) -> usize {
        self.cache.read().unwrap().len()
    }

    fn check(&self, w: &Word) -> Result<()> {
        for l in w.letters() {
            self.source_of(l.gen)?;
        }
        if w.len() > self.max_degree {
            return Err(Error::Resource(format!("word length {} exceeds degree bound {}", w.len(), self.max_degree)));
        }
        Ok(())
    }

    /// `φ(w)` by the centering recursion.
    pub fn evaluate(&self, w: &Word) -> Result<S> {
        self.check(w)?;
        self.eval_word(w)
    }

    pub fn evaluate_poly(&self, p: &NcPoly<S>) -> Result<S> {
        let mut acc = S::zero();
        for (w, c) in p.terms() {
            self.check(w)?;
            acc = acc + c.clone() * self.eval_word(w)?;
        }
        Ok(acc)
    }

    pub(crate) fn evaluate_poly_unbounded(&self, p: &NcPoly<S>) -> Result<S> {
        let mut acc = S::zero();
        for (w, c) in p.terms() {
            acc = acc + c.clone() * self.eval_word(w)?;
        }
        Ok(acc)
    }

    pub(crate) fn cumulant_evaluate_poly(&self, p: &NcPoly<S>) -> Result<S> {
        let mut acc = S::zero();
        for (w, c) in p.terms() {
            acc = acc + c.clone() * crate::ncpartitions::word_cumulant_evaluate(self, w)?;
        }
        Ok(acc)
    }

    fn blocks(&self, w: &Word) -> Result<Vec<Block>> {
        let mut blocks: Vec<Block> = Vec::new();
        for l in w.letters() {
            let src = self.source_of(l.gen)?;
            match blocks.last_mut() {
                Some(b) if b.src == src => b.word.0.push(*l),
                _ => blocks.push(Block { src, word: Word::from_letters([*l]) }),
            }
        }
        Ok(blocks)
    }

    fn eval_word(&self, w: &Word) -> Result<S> {
        if w.is_empty() {
            return Ok(S::one());
        }
        let mut blocks = self.blocks(w)?;
        // cyclic normal form: first and last blocks come from different sources
        if blocks.len() > 1 && blocks[0].src == blocks[blocks.len() - 1].src {
            let last = blocks.pop().unwrap();
            let mut word = last.word;
            word.0.extend_from_slice(blocks[0].word.letters());
            blocks[0].word = word;
        }
        let mut reduced = false;
        let mut kept = Vec::with_capacity(blocks.len());
        for b in blocks {
            match self.sources[b.src].canonical(b.word.letters()) {
                Some(c) => {
                    reduced |= c != b.word;
                    kept.push(Block { src: b.src, word: c });
                }
                None => reduced = true,
            }
        }
        if kept.is_empty() {
            return Ok(S::one());
        }
        if kept.len() == 1 {
            return self.sources[kept[0].src].eval_block(&kept[0].word, false);
        }
        if reduced {
            let w2 = Word::from_letters(kept.iter().flat_map(|b| b.word.letters().iter().copied()));
            if kept.windows(2).any(|p| p[0].src == p[1].src) || kept[0].src == kept[kept.len() - 1].src {
                return self.eval_word(&w2);
            }
        }
        // gauge selection rule
        let mut charge: HashMap<usize, i64> = HashMap::new();
        for b in &kept {
            if self.sources[b.src].gauge_invariant {
                *charge.entry(b.src).or_default() += self.sources[b.src].charge(b.word.letters());
            }
        }
        if charge.values().any(|&c| c != 0) {
            return Ok(S::zero());
        }
        let key = canonical_rotation(&kept);
        if let Some(v) = self.cache.read().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let value = self.centering(&kept)?;
        self.cache.write().unwrap().insert(key, value.clone());
        Ok(value)
    }

    fn centering(&self, blocks: &[Block]) -> Result<S> {
        let m = blocks.len();
        let means: Vec<S> = blocks.iter().map(|b| self.sources[b.src].eval_block(&b.word, false)).collect::<Result<_>>()?;
        let free: Vec<usize> = (0..m).filter(|&i| !means[i].is_zero()).collect();
        let mut total = S::zero();
        // T ranges over nonempty subsets of blocks with nonzero mean that are replaced by their mean
        for mask in 1u64..(1u64 << free.len()) {
            let mut coeff = S::one();
            let mut dropped = vec![false; m];
            let mut parity = false;
            for (j, &i) in free.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    coeff = coeff * means[i].clone();
                    dropped[i] = true;
                    parity = !parity;
                }
            }
            let rest = Word::from_letters(
                blocks.iter().enumerate().filter(|(i, _)| !dropped[*i]).flat_map(|(_, b)| b.word.letters().iter().copied()),
            );
            let v = coeff * self.eval_word(&rest)?;
            // φ(w) = -Σ_T (-1)^{|T|} Π_T c_i φ(w_{T^c})
            total = if parity { total + v } else { total - v };
        }
        Ok(total)
    }
}

fn canonical_rotation(blocks: &[Block]) -> Word {
    let w = Word::from_letters(blocks.iter().flat_map(|b| b.word.letters().iter().copied()));
    let mut starts = Vec::with_capacity(blocks.len());
    let mut pos = 0;
    for b in blocks {
        starts.push(pos);
        pos += b.word.len();
    }
    starts.into_iter().map(|s| w.rotate(s)).min().unwrap()
}

/// A functional in either scalar mode.
#[derive(Debug)]
pub enum DynFunctional {
    Exact(TraceFunctional<Gaussian>),
    Float(TraceFunctional<Complex64>),
}

impl DynFunctional {
    pub fn is_exact(&self) -> bool {
        matches!(self, DynFunctional::Exact(_))
    }

    /// Evaluate a word; exact values are converted at the end.
    pub fn evaluate(&self, w: &Word) -> Result<Complex64> {
        match self {
            DynFunctional::Exact(f) => f.evaluate(w).map(|v| v.to_c64()),
            DynFunctional::Float(f) => f.evaluate(w),
        }
    }

    /// Exact value as a string, when available.
    pub fn evaluate_exact_string(&self, w: &Word) -> Result<Option<String>> {
        match self {
            DynFunctional::Exact(f) => {
                let v = f.evaluate(w)?;
                Ok(Some(if v.im.is_zero() { v.re.to_string() } else { format!("{}+{}i", v.re, v.im) }))
            }
            DynFunctional::Float(_) => Ok(None),
        }
    }

    /// R-diagonal functional for generator `a`, exact when `ν` has exact
    /// moments and `prefer_exact` is set.
    pub fn rdiagonal(nu: &CompactMeasure, prefer_exact: bool) -> Result<DynFunctional> {
        if prefer_exact && nu.is_exact() {
            Ok(DynFunctional::Exact(rdiagonal_functional(nu)?))
        } else {
            Ok(DynFunctional::Float(rdiagonal_functional(nu)?))
        }
    }
}

/// Functional for a single R-diagonal generator `a` with `a*a ~ ν`.
pub fn rdiagonal_functional<S: Scalar>(nu: &CompactMeasure) -> Result<TraceFunctional<S>> {
    TraceFunctional::builder().rdiagonal("a", nu, RDiagonalRepr::Symmetric)?.label(format!("rdiagonal[{}]", nu.label())).build()
}

/// Declarative description of one free factor.
#[derive(Clone, Debug)]
pub enum SourceSpec {
    Measure(CompactMeasure),
    Semicircular(f64),
    Circular(f64),
    Haar,
    RDiagonal(CompactMeasure),
    Projection(f64),
}

/// Free product of the listed generator sources and an optional shared
/// algebra `B`.
pub fn free_family_functional<S: Scalar>(
    spec: &[(String, SourceSpec)],
    shared: Option<(String, SourceSpec)>,
) -> Result<TraceFunctional<S>> {
    let mut seen = HashSet::new();
    let mut b = TraceFunctional::<S>::builder();
    for (name, s) in spec.iter().chain(shared.iter()) {
        if !seen.insert(name.clone()) {
            return input(format!("duplicate id `{name}`"));
        }
        b = match s {
            SourceSpec::Measure(mu) => b.measure(name, mu)?,
            SourceSpec::Semicircular(v) => b.semicircular(name, S::from_f64(*v)),
            SourceSpec::Circular(v) => b.circular(name, S::from_f64(*v))?,
            SourceSpec::Haar => b.haar(name),
            SourceSpec::RDiagonal(nu) => b.rdiagonal(name, nu, RDiagonalRepr::Symmetric)?,
            SourceSpec::Projection(t) => b.projection(name, S::from_f64(*t)),
        };
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    type F = TraceFunctional<Gaussian>;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    fn int(n: i64) -> Gaussian {
        Gaussian::from_i64(n)
    }

    #[test]
    fn haar_and_semicircle() {
        let f = F::builder().haar("u").semicircular("s", int(1)).build().unwrap();
        assert_eq!(f.evaluate(&w("u u u")).unwrap(), int(0));
        assert_eq!(f.evaluate(&w("u u*")).unwrap(), int(1));
        assert_eq!(f.evaluate(&w("s s s s")).unwrap(), int(2));
        assert_eq!(f.evaluate(&w("s u s u*")).unwrap(), int(0));
        assert_eq!(f.evaluate(&w("s s u s s u*")).unwrap(), int(1));
        assert_eq!(f.evaluate(&Word::empty()).unwrap(), int(1));
    }

    #[test]
    fn free_semicirculars() {
        let f = F::builder().semicircular("x", int(1)).semicircular("y", int(1)).build().unwrap();
        // φ(x y x y) = 0, φ(x x y y) = 1
        assert_eq!(f.evaluate(&w("x y x y")).unwrap(), int(0));
        assert_eq!(f.evaluate(&w("x x y y")).unwrap(), int(1));
        // φ(x² y² x² y²) = 2·1·1 + ... known value 5 - 1 = ?; compare against cumulant path
        let v = f.evaluate(&w("x x y y x x y y")).unwrap();
        assert_eq!(v, crate::ncpartitions::word_cumulant_evaluate(&f, &w("x x y y x x y y")).unwrap());
    }

    #[test]
    fn rdiagonal_examples() {
        let qc = CompactMeasure::quartercircle(4.0).unwrap();
        let f: F = rdiagonal_functional(&qc).unwrap();
        assert_eq!(f.evaluate(&w("a* a")).unwrap(), int(1));
        assert_eq!(f.evaluate(&w("a* a a* a")).unwrap(), int(2));
        assert_eq!(f.evaluate(&w("a")).unwrap(), int(0));
        assert_eq!(f.evaluate(&w("a a")).unwrap(), int(0));
        let d: F = rdiagonal_functional(&CompactMeasure::point_mass(1.0)).unwrap();
        assert_eq!(d.evaluate(&w("a a* a a* a a*")).unwrap(), int(1));
        assert_eq!(d.evaluate(&w("a a")).unwrap(), int(0));
    }

    #[test]
    fn circular_fourth_moment() {
        let f = F::builder().circular("c", int(1)).unwrap().build().unwrap();
        assert_eq!(f.evaluate(&w("c* c c* c")).unwrap(), int(2));
        assert_eq!(f.evaluate(&w("c* c* c c")).unwrap(), int(1));
        assert_eq!(f.evaluate(&w("c c* c* c")).unwrap(), int(1));
    }

    #[test]
    fn errors() {
        let f = F::builder().haar("u").max_degree(4).build().unwrap();
        assert!(matches!(f.evaluate(&w("q")), Err(Error::UnknownGenerator(_))));
        assert!(matches!(f.evaluate(&w("u u u u u")), Err(Error::Resource(_))));
        assert!(F::builder().haar("u").haar("u").build().is_err());
        let t = F::builder().table(&["t"], HashMap::new()).build().unwrap();
        assert!(matches!(t.evaluate(&w("t")), Err(Error::MissingWord(_))));
    }

    #[test]
    fn float_mode_positive_repr() {
        let qc = CompactMeasure::quartercircle(4.0).unwrap();
        let f = TraceFunctional::<Complex64>::builder().rdiagonal("a", &qc, RDiagonalRepr::Positive).unwrap().build().unwrap();
        let v = f.evaluate(&w("a* a a* a")).unwrap();
        assert!((v.re - 2.0).abs() < 1e-9);
        assert!(TraceFunctional::<Gaussian>::builder().rdiagonal("a", &qc, RDiagonalRepr::Positive).is_err());
    }
}

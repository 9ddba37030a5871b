//! Conjugate relations for candidate conjugate vectors given as polynomials.
//!
//! A relation is indexed by a sequence `B₀ a_{i₁} B₁ ⋯ a_{iₙ} Bₙ` with the
//! `B`'s running over a spanning set of the coefficient algebra. Every such
//! sequence is a `d × d` matrix over polynomials; its entrywise expectation is
//! cached, so both sides of each relation reduce to table lookups plus one
//! trace against the candidate.

use std::collections::HashMap;

use crate::engine::checks::ViolationReport;
use crate::engine::functional::TraceFunctional;
use crate::engine::matrix::{eta, eta0, MatrixOverPoly, ScalarMatrix};
use crate::engine::poly::NcPoly;
use crate::error::{input, Error, Result};
use crate::scalar::Scalar;

/// One member of a family together with its candidate conjugate vector.
#[derive(Clone)]
pub struct CandidateEntry<S> {
    pub label: String,
    pub element: MatrixOverPoly<S>,
    pub candidate: MatrixOverPoly<S>,
}

/// Candidate conjugate system for a selfadjoint family.
///
/// Non-selfadjoint members are entered as pairs, so the candidate for `a*`
/// is the adjoint of the candidate for `a` by construction.
#[derive(Clone, Default)]
pub struct ConjugateCandidate<S> {
    entries: Vec<CandidateEntry<S>>,
}

impl<S: Scalar> ConjugateCandidate<S> {
    pub fn new() -> Self {
        ConjugateCandidate { entries: Vec::new() }
    }

    /// Selfadjoint generator `name` with candidate `xi`.
    pub fn selfadjoint(self, name: &str, xi: NcPoly<S>) -> Self {
        self.matrix_selfadjoint(name, MatrixOverPoly::scalar_poly(NcPoly::gen(name)), MatrixOverPoly::scalar_poly(xi))
    }

    /// Generator `name` and its adjoint, with candidates `xi` and `xi*`.
    pub fn pair(self, name: &str, xi: NcPoly<S>) -> Self {
        self.matrix_pair(name, MatrixOverPoly::scalar_poly(NcPoly::gen(name)), MatrixOverPoly::scalar_poly(xi))
    }

    pub fn matrix_selfadjoint(mut self, label: &str, element: MatrixOverPoly<S>, candidate: MatrixOverPoly<S>) -> Self {
        self.entries.push(CandidateEntry { label: label.into(), element, candidate });
        self
    }

    pub fn matrix_pair(mut self, label: &str, element: MatrixOverPoly<S>, candidate: MatrixOverPoly<S>) -> Self {
        let (ea, ca) = (element.adjoint(), candidate.adjoint());
        self.entries.push(CandidateEntry { label: label.into(), element, candidate });
        self.entries.push(CandidateEntry { label: format!("{label}*"), element: ea, candidate: ca });
        self
    }

    pub fn entries(&self) -> &[CandidateEntry<S>] {
        &self.entries
    }

    /// The family with each candidate replaced by the adjoint of the
    /// candidate of the adjoint member.
    pub fn adjoint_permuted(&self) -> Result<Self> {
        let mut entries = Vec::with_capacity(self.entries.len());
        for e in &self.entries {
            let target = e.element.adjoint();
            let partner = self
                .entries
                .iter()
                .find(|o| o.element == target)
                .ok_or_else(|| Error::Input(format!("family is not selfadjoint: no adjoint for `{}`", e.label)))?;
            entries.push(CandidateEntry { label: e.label.clone(), element: e.element.clone(), candidate: partner.candidate.adjoint() });
        }
        Ok(ConjugateCandidate { entries })
    }

    fn dim(&self) -> Result<usize> {
        let d = self.entries.first().map(|e| e.element.dim()).ok_or_else(|| Error::Input("empty family".into()))?;
        if self.entries.iter().any(|e| e.element.dim() != d || e.candidate.dim() != d) {
            return input("family members and candidates must share one dimension");
        }
        Ok(d)
    }
}

/// Spanning set of the coefficient algebra `B`.
#[derive(Clone)]
pub struct SpanningSet<S> {
    pub members: Vec<(String, MatrixOverPoly<S>)>,
}

impl<S: Scalar> SpanningSet<S> {
    /// `C·I` in `M_d`.
    pub fn scalars(d: usize) -> Self {
        SpanningSet { members: vec![("I".into(), MatrixOverPoly::identity(d))] }
    }

    /// `M_d(C)` through its matrix units.
    pub fn matrix_units(d: usize) -> Self {
        let mut members = Vec::new();
        for i in 0..d {
            for j in 0..d {
                members.push((format!("V{}{}", i + 1, j + 1), MatrixOverPoly::unit(d, i, j)));
            }
        }
        SpanningSet { members }
    }

    /// Diagonal scalar matrices.
    pub fn diagonal(d: usize) -> Self {
        SpanningSet { members: (0..d).map(|i| (format!("V{}{}", i + 1, i + 1), MatrixOverPoly::unit(d, i, i))).collect() }
    }

    /// Any list of elements, e.g. `{1, p}` for a projection `p`.
    pub fn custom(members: Vec<(String, MatrixOverPoly<S>)>) -> Self {
        SpanningSet { members }
    }

    fn dim(&self) -> usize {
        self.members[0].1.dim()
    }
}

/// Conditional expectation onto the coefficient algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expectation {
    /// Onto `M_d(C)`: entrywise.
    Full,
    /// Onto the diagonal matrices.
    Diagonal,
}

/// Completely positive map used in the η-twisted relations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EtaMap {
    Eta,
    Eta0,
}

enum Rhs {
    Scalar,
    Twisted(Expectation, EtaMap),
}

type Key = u128;

fn push_key(key: Key, sym: usize) -> Key {
    key << 4 | (sym as Key + 1)
}

struct Tables<S> {
    expectations: HashMap<Key, ScalarMatrix<S>>,
    lhs: HashMap<Key, Vec<S>>,
}

struct Sweep<'a, S> {
    f: &'a TraceFunctional<S>,
    family: &'a [CandidateEntry<S>],
    span: &'a SpanningSet<S>,
    max_n: usize,
    tables: Tables<S>,
}

impl<'a, S: Scalar> Sweep<'a, S> {
    fn fill(&mut self, p: &MatrixOverPoly<S>, key: Key, n: usize) -> Result<()> {
        let e = p.expectation_m(self.f)?;
        if !e.is_zero() {
            self.tables.expectations.insert(key, e);
        }
        let mut lhs = Vec::with_capacity(self.family.len());
        for c in self.family {
            lhs.push((&c.candidate * p).trace(self.f)?);
        }
        if lhs.iter().any(|v| !v.is_zero()) {
            self.tables.lhs.insert(key, lhs);
        }
        if n == self.max_n {
            return Ok(());
        }
        for (ai, a) in self.family.iter().enumerate() {
            let q = p * &a.element;
            if q.is_zero() {
                continue;
            }
            for (bi, (_, b)) in self.span.members.iter().enumerate() {
                let r = &q * b;
                if r.is_zero() {
                    continue;
                }
                self.fill(&r, push_key(push_key(key, ai), bi), n + 1)?;
            }
        }
        Ok(())
    }

    fn expectation(&self, key: Key) -> Option<&ScalarMatrix<S>> {
        self.tables.expectations.get(&key)
    }

    fn describe(&self, cand: usize, syms: &[usize]) -> String {
        let mut s = format!("ξ[{}] ·", self.family[cand].label);
        for (i, &x) in syms.iter().enumerate() {
            let name = if i % 2 == 0 { &self.span.members[x].0 } else { &self.family[x].label };
            s.push(' ');
            s.push_str(name);
        }
        s
    }
}

fn key_of(syms: &[usize]) -> Key {
    syms.iter().fold(0, |k, &s| push_key(k, s))
}

fn sweep<S: Scalar>(
    f: &TraceFunctional<S>,
    cand: &ConjugateCandidate<S>,
    span: &SpanningSet<S>,
    rhs: Rhs,
    max_n: usize,
) -> Result<ViolationReport> {
    let d = cand.dim()?;
    if span.members.is_empty() || span.dim() != d {
        return input("spanning set must be nonempty and match the family dimension");
    }
    let (na, nb) = (cand.entries.len(), span.members.len());
    if na > 15 || nb > 15 || max_n > 15 {
        return Err(Error::Resource("at most 15 family members, 15 spanning elements and degree 15".into()));
    }
    let mut sw = Sweep { f, family: &cand.entries, span, max_n, tables: Tables { expectations: HashMap::new(), lhs: HashMap::new() } };
    for (bi, (_, b)) in span.members.iter().enumerate() {
        if !b.is_zero() {
            sw.fill(b, push_key(0, bi), 0)?;
        }
    }

    let inv_d = S::ratio(1, d as i64);
    let mut report = ViolationReport::new::<S>(max_n);
    let mut syms: Vec<usize> = Vec::new();
    for n in 0..=max_n {
        let total = nb * (na * nb).pow(n as u32);
        for code in 0..total {
            syms.clear();
            let mut c = code;
            syms.push(c % nb);
            c /= nb;
            for _ in 0..n {
                syms.push(c % na);
                c /= na;
                syms.push(c % nb);
                c /= nb;
            }
            let key = key_of(&syms);
            let lhs = sw.tables.lhs.get(&key);
            // prefix keys: pre_m covers syms[..2m-1]; suffix keys: syms[2m..]
            let mut pre_keys = Vec::with_capacity(n + 1);
            let mut k: Key = 0;
            for (i, &s) in syms.iter().enumerate() {
                k = push_key(k, s);
                if i % 2 == 0 {
                    pre_keys.push(k);
                }
            }
            for (ci, _) in cand.entries.iter().enumerate() {
                let mut rhs_v = S::zero();
                for m in 1..=n {
                    let letter = syms[2 * m - 1];
                    let pre = sw.expectation(pre_keys[m - 1]);
                    let suf = sw.expectation(key_of(&syms[2 * m..]));
                    let (Some(pre), Some(suf)) = (pre, suf) else { continue };
                    match rhs {
                        Rhs::Scalar => {
                            if letter == ci {
                                rhs_v = rhs_v + pre.trace() * suf.trace();
                            }
                        }
                        Rhs::Twisted(e, map) => {
                            let cond = match e {
                                Expectation::Full => pre.clone(),
                                Expectation::Diagonal => pre.diagonal(),
                            };
                            let twisted = match map {
                                EtaMap::Eta => eta(&cond)?,
                                EtaMap::Eta0 => eta0(&cond)?,
                            };
                            let mut acc = S::zero();
                            let prod = &twisted * suf;
                            for i in 0..d {
                                acc = acc + prod.get(i, i).clone();
                            }
                            rhs_v = rhs_v + acc * inv_d.clone();
                        }
                    }
                }
                let l = lhs.map_or_else(S::zero, |v| v[ci].clone());
                report.record(&(l - rhs_v), || sw.describe(ci, &syms));
            }
        }
    }
    Ok(report)
}

/// Check `φ(ξ_i B₀ a_{i₁} ⋯ a_{iₙ} Bₙ) = Σ_m δ_{i,i_m} φ(B₀ ⋯ B_{m-1}) φ(B_m ⋯ Bₙ)`
/// for all `n ≤ max_degree` and all `B`'s from the spanning set.
pub fn verify_conjugate<S: Scalar>(
    f: &TraceFunctional<S>,
    cand: &ConjugateCandidate<S>,
    span: &SpanningSet<S>,
    max_degree: usize,
) -> Result<ViolationReport> {
    check_generators(f, cand)?;
    sweep(f, cand, span, Rhs::Scalar, max_degree)
}

/// Check the η-twisted relations
/// `φ(X B₀ x ⋯ x Bₙ) = Σ_m φ(η(E_B(B₀ x ⋯ x B_{m-1})) B_m x ⋯ x Bₙ)` for a
/// single selfadjoint `x`.
pub fn verify_conjugate_eta<S: Scalar>(
    f: &TraceFunctional<S>,
    x: &MatrixOverPoly<S>,
    candidate: &MatrixOverPoly<S>,
    span: &SpanningSet<S>,
    expectation: Expectation,
    map: EtaMap,
    max_degree: usize,
) -> Result<ViolationReport> {
    if x.dim() != 2 || candidate.dim() != 2 {
        return input("η-twisted relations are defined for 2×2 matrices");
    }
    let cand = ConjugateCandidate::new().matrix_selfadjoint("x", x.clone(), candidate.clone());
    check_generators(f, &cand)?;
    sweep(f, &cand, span, Rhs::Twisted(expectation, map), max_degree)
}

/// Check the matrix relations for `{A, A*}` with candidates `{X, X*}` over the
/// scalar matrix units.
pub fn verify_matrix_conjugate<S: Scalar>(
    f: &TraceFunctional<S>,
    a: &MatrixOverPoly<S>,
    x: &MatrixOverPoly<S>,
    max_degree: usize,
) -> Result<ViolationReport> {
    let d = a.dim();
    let cand = ConjugateCandidate::new().matrix_pair("A", a.clone(), x.clone());
    verify_conjugate(f, &cand, &SpanningSet::matrix_units(d), max_degree)
}

fn check_generators<S: Scalar>(f: &TraceFunctional<S>, cand: &ConjugateCandidate<S>) -> Result<()> {
    for e in &cand.entries {
        for i in 0..e.candidate.dim() {
            for j in 0..e.candidate.dim() {
                for g in e.candidate.get(i, j).generators().into_iter().chain(e.element.get(i, j).generators()) {
                    if !f.has_generator(g.name()) {
                        return Err(Error::UnknownGenerator(g.name().to_string()));
                    }
                }
            }
        }
    }
    Ok(())
}

/// `Σ_i ||ξ_i||²` for a verified candidate system.
pub fn fisher_from_candidates<S: Scalar>(
    f: &TraceFunctional<S>,
    cand: &ConjugateCandidate<S>,
    verified: &ViolationReport,
) -> Result<S> {
    if !verified.passed() {
        return Err(Error::Unverified(verified.max_abs_violation));
    }
    let mut acc = S::zero();
    for e in &cand.entries {
        acc = acc + squared_norm(f, &e.candidate)?;
    }
    Ok(acc)
}

/// `||X||² = φ_d(X* X)`.
pub fn squared_norm<S: Scalar>(f: &TraceFunctional<S>, x: &MatrixOverPoly<S>) -> Result<S> {
    (&x.adjoint() * x).trace(f)
}

/// `X = (1/d)(ξ_ji)` from the entry candidates `ξ_ij` (`xi[i][j]`).
pub fn entries_to_matrix_conjugate<S: Scalar>(xi: &[Vec<NcPoly<S>>]) -> Result<MatrixOverPoly<S>> {
    let d = xi.len();
    if xi.iter().any(|r| r.len() != d) {
        return input("entry candidates must form a square array");
    }
    let s = S::ratio(1, d as i64);
    let mut x = MatrixOverPoly::zero(d);
    for i in 0..d {
        for j in 0..d {
            x.set(i, j, xi[j][i].scale(&s));
        }
    }
    Ok(x)
}

/// Inverse of [`entries_to_matrix_conjugate`]: `ξ_ij = d · X_ji`.
pub fn matrix_to_entries<S: Scalar>(x: &MatrixOverPoly<S>) -> Vec<Vec<NcPoly<S>>> {
    let d = x.dim();
    let s = S::from_i64(d as i64);
    (0..d).map(|i| (0..d).map(|j| x.get(j, i).scale(&s)).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Gaussian;

    type F = TraceFunctional<Gaussian>;

    fn g(n: i64) -> Gaussian {
        Gaussian::from_i64(n)
    }

    #[test]
    fn semicircle_is_self_conjugate() {
        let f = F::builder().semicircular("s", g(1)).build().unwrap();
        let cand = ConjugateCandidate::new().selfadjoint("s", NcPoly::gen("s"));
        let r = verify_conjugate(&f, &cand, &SpanningSet::scalars(1), 8).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(fisher_from_candidates(&f, &cand, &r).unwrap(), g(1));

        let bad = ConjugateCandidate::new().selfadjoint("s", NcPoly::gen("s").scale(&g(2)));
        let r = verify_conjugate(&f, &bad, &SpanningSet::scalars(1), 4).unwrap();
        assert!(!r.passed());
        assert!(r.witness_word.as_deref().unwrap().contains('s'));
        assert!(matches!(fisher_from_candidates(&f, &bad, &r), Err(Error::Unverified(_))));
    }

    #[test]
    fn circular_pair() {
        let f = F::builder().circular("c", g(1)).unwrap().max_degree(16).build().unwrap();
        let cand = ConjugateCandidate::new().pair("c", NcPoly::gen("c").adjoint());
        let r = verify_conjugate(&f, &cand, &SpanningSet::scalars(1), 6).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(fisher_from_candidates(&f, &cand, &r).unwrap(), g(2));
        let r2 = verify_conjugate(&f, &cand.adjoint_permuted().unwrap(), &SpanningSet::scalars(1), 6).unwrap();
        assert!(r2.passed());
    }

    #[test]
    fn unknown_generator_rejected() {
        let f = F::builder().semicircular("s", g(1)).build().unwrap();
        let cand = ConjugateCandidate::new().selfadjoint("s", NcPoly::gen("t"));
        assert!(matches!(verify_conjugate(&f, &cand, &SpanningSet::scalars(1), 2), Err(Error::UnknownGenerator(_))));
    }

    #[test]
    fn entry_maps_round_trip() {
        let xi = vec![
            vec![NcPoly::<Gaussian>::gen("p"), NcPoly::gen("q")],
            vec![&NcPoly::gen("p") * &NcPoly::gen("q"), NcPoly::one()],
        ];
        let x = entries_to_matrix_conjugate(&xi).unwrap();
        assert_eq!(x.get(0, 1), &xi[1][0].scale(&Gaussian::ratio(1, 2)));
        assert_eq!(matrix_to_entries(&x), xi);
        let one = vec![vec![NcPoly::<Gaussian>::gen("p")]];
        assert_eq!(matrix_to_entries(&entries_to_matrix_conjugate(&one).unwrap()), one);
    }
}

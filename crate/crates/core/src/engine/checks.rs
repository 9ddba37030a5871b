//! Vanishing checks: alternating centered words, amalgamated freeness over
//! the diagonal, and plain freeness of two families.

use serde::{Deserialize, Serialize};

use super::functional::TraceFunctional;
use super::matrix::MatrixOverPoly;
use super::poly::NcPoly;
use crate::error::Result;
use crate::scalar::Scalar;

/// Outcome of a sweep over a family of relations that should vanish.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ViolationReport {
    pub max_abs_violation: f64,
    pub witness_word: Option<String>,
    pub relations_checked: usize,
    pub degree: usize,
    pub exact: bool,
    pub tolerance: f64,
}

impl ViolationReport {
    pub fn new<S: Scalar>(degree: usize) -> Self {
        ViolationReport {
            max_abs_violation: 0.0,
            witness_word: None,
            relations_checked: 0,
            degree,
            exact: S::EXACT,
            tolerance: S::tolerance(),
        }
    }

    /// Record one relation with residual `value`.
    pub fn record<S: Scalar>(&mut self, value: &S, witness: impl FnOnce() -> String) {
        self.relations_checked += 1;
        let mut v = value.abs();
        if S::EXACT && v == 0.0 && !value.is_zero() {
            v = f64::MIN_POSITIVE;
        }
        if v > self.max_abs_violation {
            self.max_abs_violation = v;
            if v > self.tolerance {
                self.witness_word = Some(witness());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.max_abs_violation <= self.tolerance
    }

    /// Combine two sweeps, keeping the worse witness.
    pub fn merge(mut self, other: ViolationReport) -> Self {
        self.relations_checked += other.relations_checked;
        self.degree = self.degree.max(other.degree);
        self.tolerance = self.tolerance.max(other.tolerance);
        self.exact &= other.exact;
        if other.max_abs_violation > self.max_abs_violation {
            self.max_abs_violation = other.max_abs_violation;
            self.witness_word = other.witness_word;
        }
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// The four families `w_{ij;k}(b)`, `i, j ∈ {1, 2}`:
/// centered `(bb*)^k`, `b(b*b)^{k-1}`, `b*(bb*)^{k-1}`, centered `(b*b)^k`.
pub fn alternating_word<S: Scalar>(f: &TraceFunctional<S>, b: &NcPoly<S>, i: usize, j: usize, k: usize) -> Result<NcPoly<S>> {
    let bs = b.adjoint();
    let bbs = b * &bs;
    let bsb = &bs * b;
    Ok(match (i, j) {
        (1, 1) => {
            let p = bbs.pow(k);
            let c = f.evaluate_poly(&p)?;
            &p - &NcPoly::constant(c)
        }
        (1, 2) => b * &bsb.pow(k - 1),
        (2, 1) => &bs * &bbs.pow(k - 1),
        (2, 2) => {
            let p = bsb.pow(k);
            let c = f.evaluate_poly(&p)?;
            &p - &NcPoly::constant(c)
        }
        _ => unreachable!("indices are 1 or 2"),
    })
}

fn word_degree(i: usize, j: usize, k: usize) -> usize {
    if i == j {
        2 * k
    } else {
        2 * k - 1
    }
}

/// Visit every index tuple `(i_0, …, i_n)` with powers `(k_1, …, k_n)`,
/// `n ≤ n_max`, `k_m ≤ k_max`, whose word degree (in units of `deg b`) stays
/// within `budget`.
fn for_each_index<F: FnMut(&[usize], &[usize]) -> Result<()>>(
    n_max: usize,
    k_max: usize,
    budget: Option<usize>,
    mut visit: F,
) -> Result<()> {
    #[allow(clippy::too_many_arguments)]
    fn grow<F: FnMut(&[usize], &[usize]) -> Result<()>>(
        n: usize,
        k_max: usize,
        left: usize,
        idx: &mut Vec<usize>,
        ks: &mut Vec<usize>,
        visit: &mut F,
    ) -> Result<()> {
        if ks.len() == n {
            return visit(idx, ks);
        }
        let prev = 3 - idx[idx.len() - 1];
        for next in 1..=2 {
            for k in 1..=k_max {
                let deg = word_degree(prev, next, k);
                if deg > left {
                    continue;
                }
                idx.push(next);
                ks.push(k);
                grow(n, k_max, left - deg, idx, ks, visit)?;
                idx.pop();
                ks.pop();
            }
        }
        Ok(())
    }
    let left = budget.unwrap_or(usize::MAX);
    for n in 1..=n_max {
        for first in 1..=2 {
            grow(n, k_max, left, &mut vec![first], &mut Vec::with_capacity(n), &mut visit)?;
        }
    }
    Ok(())
}

fn describe(idx: &[usize], ks: &[usize]) -> String {
    (1..idx.len()).map(|m| format!("w[{}{};{}]", 3 - idx[m - 1], idx[m], ks[m - 1])).collect::<Vec<_>>().join(" ")
}

/// Sweep `ψ(w_{ī₀i₁;k₁}(b) ⋯ w_{ī_{n-1}i_n;k_n}(b))` over `n ≤ n_max`, `k_i ≤ k_max`.
pub fn check_alternating_vanishing<S: Scalar>(
    f: &TraceFunctional<S>,
    b: &NcPoly<S>,
    n_max: usize,
    k_max: usize,
) -> Result<ViolationReport> {
    alternating_sweep(f, b, n_max, k_max, None)
}

/// [`check_alternating_vanishing`] over every product of total degree at
/// most `degree` in `b, b*`.
pub fn check_alternating_vanishing_to_degree<S: Scalar>(
    f: &TraceFunctional<S>,
    b: &NcPoly<S>,
    degree: usize,
) -> Result<ViolationReport> {
    let (n_max, k_max, budget) = degree_bounds(b, degree);
    let mut r = alternating_sweep(f, b, n_max, k_max, Some(budget))?;
    r.degree = degree;
    Ok(r)
}

fn degree_bounds<S: Scalar>(b: &NcPoly<S>, degree: usize) -> (usize, usize, usize) {
    let units = degree / b.degree().max(1);
    (units.max(1), units.div_ceil(2).max(1), units)
}

fn alternating_sweep<S: Scalar>(
    f: &TraceFunctional<S>,
    b: &NcPoly<S>,
    n_max: usize,
    k_max: usize,
    budget: Option<usize>,
) -> Result<ViolationReport> {
    let words = word_table(f, b, k_max)?;
    let mut report = ViolationReport::new::<S>(n_max * 2 * k_max * b.degree());
    for_each_index(n_max, k_max, budget, |idx, ks| {
        let mut p = NcPoly::one();
        for m in 1..idx.len() {
            p = &p * &words[&(3 - idx[m - 1], idx[m], ks[m - 1])];
        }
        let v = f.evaluate_poly(&p)?;
        report.record(&v, || describe(idx, ks));
        Ok(())
    })?;
    Ok(report)
}

type WordTable<S> = std::collections::HashMap<(usize, usize, usize), NcPoly<S>>;

fn word_table<S: Scalar>(f: &TraceFunctional<S>, b: &NcPoly<S>, k_max: usize) -> Result<WordTable<S>> {
    let mut t = WordTable::new();
    for i in 1..=2 {
        for j in 1..=2 {
            for k in 1..=k_max {
                t.insert((i, j, k), alternating_word(f, b, i, j, k)?);
            }
        }
    }
    Ok(t)
}

/// Sweep `E_D(U' W_{ī₀i₁;k₁} V_{i₁ī₁} ⋯ V_{i_{n-1}ī_{n-1}} W_{ī_{n-1}i_n;k_n} U'')`
/// for `U', U'' ∈ {I, V₁₂, V₂₁}`; each diagonal entry is one relation.
pub fn check_diagonal_amalgamation<S: Scalar>(
    f: &TraceFunctional<S>,
    b: &NcPoly<S>,
    n_max: usize,
    k_max: usize,
) -> Result<ViolationReport> {
    amalgamation_sweep(f, b, n_max, k_max, None)
}

/// [`check_diagonal_amalgamation`] over every product of total degree at
/// most `degree` in `b, b*`.
pub fn check_diagonal_amalgamation_to_degree<S: Scalar>(
    f: &TraceFunctional<S>,
    b: &NcPoly<S>,
    degree: usize,
) -> Result<ViolationReport> {
    let (n_max, k_max, budget) = degree_bounds(b, degree);
    let mut r = amalgamation_sweep(f, b, n_max, k_max, Some(budget))?;
    r.degree = degree;
    Ok(r)
}

fn amalgamation_sweep<S: Scalar>(
    f: &TraceFunctional<S>,
    b: &NcPoly<S>,
    n_max: usize,
    k_max: usize,
    budget: Option<usize>,
) -> Result<ViolationReport> {
    let words = word_table(f, b, k_max)?;
    let outer = [
        ("I", MatrixOverPoly::identity(2)),
        ("V12", MatrixOverPoly::unit(2, 0, 1)),
        ("V21", MatrixOverPoly::unit(2, 1, 0)),
    ];
    let mut report = ViolationReport::new::<S>(n_max * 2 * k_max * b.degree());
    for_each_index(n_max, k_max, budget, |idx, ks| {
        let mut core = MatrixOverPoly::identity(2);
        for m in 1..idx.len() {
            let (i, j) = (3 - idx[m - 1], idx[m]);
            let mut w = MatrixOverPoly::zero(2);
            w.set(i - 1, j - 1, words[&(i, j, ks[m - 1])].clone());
            core = &core * &w;
            if m + 1 < idx.len() {
                core = &core * &MatrixOverPoly::unit(2, idx[m] - 1, 2 - idx[m]);
            }
        }
        for (ln, l) in &outer {
            for (rn, r) in &outer {
                let x = &(l * &core) * r;
                let e = x.expectation_d(f)?;
                for i in 0..2 {
                    report.record(e.get(i, i), || format!("E_D({ln} {} {rn})[{}{}]", describe(idx, ks), i + 1, i + 1));
                }
            }
        }
        Ok(())
    })?;
    Ok(report)
}

/// A labelled element of a freeness group.
pub type Member<S> = (String, MatrixOverPoly<S>);

struct Monomial<S> {
    label: String,
    degree: usize,
    centered: MatrixOverPoly<S>,
}

fn monomials<S: Scalar>(f: &TraceFunctional<S>, group: &[Member<S>], max_degree: usize) -> Result<Vec<Monomial<S>>> {
    let mut letters: Vec<Member<S>> = Vec::new();
    for (name, x) in group {
        letters.push((name.clone(), x.clone()));
        let xs = x.adjoint();
        if xs != *x {
            letters.push((format!("{name}*"), xs));
        }
    }
    let d = group.first().map_or(1, |m| m.1.dim());
    let mut seen: Vec<MatrixOverPoly<S>> = Vec::new();
    let mut out = Vec::new();
    let mut layer: Vec<(String, MatrixOverPoly<S>)> = vec![(String::new(), MatrixOverPoly::identity(d))];
    for degree in 1..=max_degree {
        let mut next = Vec::new();
        for (label, m) in &layer {
            for (ln, l) in &letters {
                let p = m * l;
                if p.is_zero() || seen.contains(&p) {
                    continue;
                }
                seen.push(p.clone());
                let label = if label.is_empty() { ln.clone() } else { format!("{label} {ln}") };
                let c = p.trace(f)?;
                let centered = &p - &MatrixOverPoly::identity(d).scale(&c);
                if !centered.is_zero() {
                    out.push(Monomial { label: label.clone(), degree, centered });
                }
                next.push((label, p));
            }
        }
        layer = next;
    }
    Ok(out)
}

/// Evaluate `φ_d` on all alternating products of centered monomials in the
/// two groups with at least two factors and total degree at most `max_degree`.
pub fn check_freeness<S: Scalar>(
    f: &TraceFunctional<S>,
    group_a: &[Member<S>],
    group_b: &[Member<S>],
    max_degree: usize,
) -> Result<ViolationReport> {
    let ma = monomials(f, group_a, max_degree)?;
    let mb = monomials(f, group_b, max_degree)?;
    let mut report = ViolationReport::new::<S>(max_degree);
    let groups = [&ma, &mb];
    let d = group_a.first().or(group_b.first()).map_or(1, |m| m.1.dim());

    #[allow(clippy::too_many_arguments)]
    fn dfs<S: Scalar>(
        f: &TraceFunctional<S>,
        groups: &[&Vec<Monomial<S>>; 2],
        turn: usize,
        prefix: &MatrixOverPoly<S>,
        labels: &mut Vec<String>,
        used: usize,
        max_degree: usize,
        report: &mut ViolationReport,
    ) -> Result<()> {
        for m in groups[turn].iter() {
            if used + m.degree > max_degree {
                continue;
            }
            let p = prefix * &m.centered;
            labels.push(format!("({})°", m.label));
            if labels.len() >= 2 {
                let v = p.trace(f)?;
                report.record(&v, || labels.join(" "));
            }
            if !p.is_zero() {
                dfs(f, groups, 1 - turn, &p, labels, used + m.degree, max_degree, report)?;
            }
            labels.pop();
        }
        Ok(())
    }

    let id = MatrixOverPoly::identity(d);
    for start in 0..2 {
        dfs(f, &groups, start, &id, &mut Vec::new(), 0, max_degree, &mut report)?;
    }
    Ok(report)
}

/// [`check_freeness`] for families of polynomials (1×1 matrices).
pub fn check_freeness_polys<S: Scalar>(
    f: &TraceFunctional<S>,
    group_a: &[(&str, NcPoly<S>)],
    group_b: &[(&str, NcPoly<S>)],
    max_degree: usize,
) -> Result<ViolationReport> {
    let wrap = |g: &[(&str, NcPoly<S>)]| g.iter().map(|(n, p)| (n.to_string(), MatrixOverPoly::scalar_poly(p.clone()))).collect::<Vec<_>>();
    check_freeness(f, &wrap(group_a), &wrap(group_b), max_degree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::functional::rdiagonal_functional;
    use crate::measures::CompactMeasure;
    use crate::scalar::Gaussian;

    type F = TraceFunctional<Gaussian>;

    #[test]
    fn rdiagonal_passes_lemma() {
        let f: F = rdiagonal_functional(&CompactMeasure::quartercircle(4.0).unwrap()).unwrap();
        let r = check_alternating_vanishing(&f, &NcPoly::gen("a"), 3, 2).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.max_abs_violation, 0.0);
        assert!(r.witness_word.is_none());
    }

    #[test]
    fn shifted_semicircle_fails_at_first_order() {
        let f = F::builder().semicircular("s", Gaussian::from_i64(1)).build().unwrap();
        let b = &NcPoly::gen("s") + &NcPoly::one();
        let r = check_alternating_vanishing(&f, &b, 1, 1).unwrap();
        assert!(!r.passed());
        assert_eq!(r.max_abs_violation, 1.0);
        let r = check_diagonal_amalgamation(&f, &b, 1, 1).unwrap();
        assert!(!r.passed());
    }

    #[test]
    fn free_generators_are_free() {
        let f = F::builder().semicircular("x", Gaussian::from_i64(1)).haar("u").build().unwrap();
        let r = check_freeness_polys(&f, &[("x", NcPoly::gen("x"))], &[("u", NcPoly::gen("u"))], 6).unwrap();
        assert!(r.passed());
        assert!(r.relations_checked > 50);
    }

    #[test]
    fn a_polynomial_of_s_is_not_free_from_s() {
        let f = F::builder().semicircular("s", Gaussian::from_i64(1)).max_degree(16).build().unwrap();
        let s = NcPoly::gen("s");
        let r = check_freeness_polys(&f, &[("s", s.clone())], &[("s2", s.pow(2))], 4).unwrap();
        assert!(!r.passed());
        assert!(r.witness_word.is_some());
    }
}

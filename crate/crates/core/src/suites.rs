//! Named verification sweeps: each builds its functional, runs the relevant
//! checks and reports every residual together with a control case that is
//! expected to fail.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::conjugates::{
    entries_to_matrix_conjugate, fisher_from_candidates, squared_norm, verify_conjugate, verify_conjugate_eta,
    verify_matrix_conjugate, ConjugateCandidate, EtaMap, Expectation, SpanningSet,
};
use crate::engine::{
    block_embed, check_alternating_vanishing, check_alternating_vanishing_to_degree, check_diagonal_amalgamation,
    check_diagonal_amalgamation_to_degree, check_freeness, check_freeness_polys, MatrixOverPoly, NcPoly, RDiagonalRepr,
    TraceFunctional, ViolationReport,
};
use crate::error::{Error, Result};
use crate::measures::CompactMeasure;
use crate::scalar::{Gaussian, Scalar};
use num_complex::Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Lemma39,
    Prop38,
    Prop36,
    Prop37,
    Prop41,
    Prop51,
    Prop53,
    Lemma54,
}

impl Suite {
    pub const ALL: [Suite; 8] =
        [Suite::Lemma39, Suite::Prop38, Suite::Prop36, Suite::Prop37, Suite::Prop41, Suite::Prop51, Suite::Prop53, Suite::Lemma54];

    pub fn default_degree(self) -> usize {
        match self {
            Suite::Prop41 | Suite::Prop53 => 6,
            Suite::Lemma54 => 4,
            _ => 8,
        }
    }

    pub fn uses_measure(self) -> bool {
        matches!(self, Suite::Lemma39 | Suite::Prop38 | Suite::Prop51)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::Lemma39 => "lemma39",
            Suite::Prop38 => "prop38",
            Suite::Prop36 => "prop36",
            Suite::Prop37 => "prop37",
            Suite::Prop41 => "prop41",
            Suite::Prop51 => "prop51",
            Suite::Prop53 => "prop53",
            Suite::Lemma54 => "lemma54",
        };
        f.write_str(s)
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Input(format!("unknown suite `{s}`")))
    }
}

#[derive(Clone, Debug)]
pub struct SuiteOptions {
    /// Total degree of the sweep; the suite default when absent.
    pub degree: Option<usize>,
    /// Explicit `(n_max, k_max)` for the alternating-word suites; overrides
    /// `degree`.
    pub alternation: Option<(usize, usize)>,
    /// Distribution of `a*a` for the R-diagonal suites (quarter-circle on
    /// `[0, 4]` by default).
    pub nu: Option<CompactMeasure>,
    pub exact: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { degree: None, alternation: None, nu: None, exact: true }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    /// `true` when every relation should vanish, `false` for a control that
    /// must produce a violation.
    pub expect_vanishing: bool,
    pub report: ViolationReport,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Quantity {
    pub name: String,
    pub value: String,
    pub expected: String,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub degree: usize,
    pub exact: bool,
    pub functional: String,
    pub checks: Vec<CheckOutcome>,
    pub quantities: Vec<Quantity>,
    pub max_violation: f64,
    pub passed: bool,
}

impl SuiteReport {
    fn new(suite: Suite, degree: usize, exact: bool, functional: &str) -> Self {
        SuiteReport {
            suite,
            degree,
            exact,
            functional: functional.to_string(),
            checks: Vec::new(),
            quantities: Vec::new(),
            max_violation: 0.0,
            passed: true,
        }
    }

    fn check(&mut self, name: &str, report: ViolationReport) {
        self.max_violation = self.max_violation.max(report.max_abs_violation);
        self.push(name, true, report);
    }

    fn control(&mut self, name: &str, report: ViolationReport) {
        self.push(name, false, report);
    }

    fn push(&mut self, name: &str, expect_vanishing: bool, report: ViolationReport) {
        let ok = report.passed() == expect_vanishing;
        self.passed &= ok;
        self.checks.push(CheckOutcome { name: name.to_string(), expect_vanishing, report, ok });
    }

    fn quantity<S: Scalar>(&mut self, name: &str, value: &S, expected: &S) {
        let ok = (value.clone() - expected.clone()).abs() <= S::tolerance();
        self.passed &= ok;
        self.quantities.push(Quantity { name: name.to_string(), value: show(value), expected: show(expected), ok });
    }
}

fn show<S: Scalar>(v: &S) -> String {
    let c: Complex64 = v.to_c64();
    if c.im == 0.0 {
        format!("{}", c.re)
    } else {
        format!("{}{:+}i", c.re, c.im)
    }
}

pub fn run_suite(suite: Suite, opts: &SuiteOptions) -> Result<SuiteReport> {
    if opts.exact {
        run::<Gaussian>(suite, opts)
    } else {
        run::<Complex64>(suite, opts)
    }
}

fn run<S: Scalar>(suite: Suite, opts: &SuiteOptions) -> Result<SuiteReport> {
    let degree = opts.degree.unwrap_or(suite.default_degree());
    if degree == 0 {
        return Err(Error::Input("degree must be positive".into()));
    }
    let nu = match &opts.nu {
        Some(nu) => nu.clone(),
        None => CompactMeasure::quartercircle(4.0)?,
    };
    match suite {
        Suite::Lemma39 | Suite::Prop38 => alternating::<S>(suite, &nu, degree, opts),
        Suite::Prop36 | Suite::Prop37 => block_relations::<S>(suite, degree),
        Suite::Prop41 => matrix_entries::<S>(degree),
        Suite::Prop51 => block_freeness::<S>(&nu, degree),
        Suite::Prop53 => circular_matrix::<S>(degree),
        Suite::Lemma54 => self_conjugate::<S>(degree),
    }
}

fn g<S: Scalar>(name: &str) -> NcPoly<S> {
    NcPoly::gen(name)
}

fn alternating<S: Scalar>(suite: Suite, nu: &CompactMeasure, degree: usize, opts: &SuiteOptions) -> Result<SuiteReport> {
    let length = match opts.alternation {
        Some((n, k)) => 2 * n * k,
        None => degree,
    };
    let f = TraceFunctional::<S>::builder()
        .max_degree(length.max(12))
        .moment_order((length + 2).max(40))
        .rdiagonal("a", nu, RDiagonalRepr::Symmetric)?
        .label(format!("rdiagonal[{}]", nu.label()))
        .build()?;
    let shifted = TraceFunctional::<S>::builder().semicircular("s", S::one()).build()?;
    let b_shift = &g::<S>("s") + &NcPoly::one();
    let a = g::<S>("a");
    let mut rep = SuiteReport::new(suite, degree, S::EXACT, f.label());
    let (main, control) = match (suite, opts.alternation) {
        (Suite::Lemma39, Some((n, k))) => {
            (check_alternating_vanishing(&f, &a, n, k)?, check_alternating_vanishing(&shifted, &b_shift, 1, 1)?)
        }
        (Suite::Lemma39, None) => (
            check_alternating_vanishing_to_degree(&f, &a, degree)?,
            check_alternating_vanishing(&shifted, &b_shift, 1, 1)?,
        ),
        (_, Some((n, k))) => {
            (check_diagonal_amalgamation(&f, &a, n, k)?, check_diagonal_amalgamation(&shifted, &b_shift, 1, 1)?)
        }
        (_, None) => (
            check_diagonal_amalgamation_to_degree(&f, &a, degree)?,
            check_diagonal_amalgamation(&shifted, &b_shift, 1, 1)?,
        ),
    };
    rep.check("R-diagonal a", main);
    rep.control("shifted semicircular s + 1", control);
    Ok(rep)
}

fn circular_unit<S: Scalar>(degree: usize) -> Result<TraceFunctional<S>> {
    TraceFunctional::<S>::builder()
        .max_degree((degree + 4).max(12))
        .moment_order((degree + 4).max(40))
        .circular("a", S::one())?
        .label("circular(a)")
        .build()
}

fn block_relations<S: Scalar>(suite: Suite, degree: usize) -> Result<SuiteReport> {
    let f = circular_unit::<S>(degree)?;
    let a = g::<S>("a");
    let xi = a.adjoint();
    let big_a = block_embed(&a);
    // X = [[0, ξ*], [ξ, 0]]
    let x = MatrixOverPoly::from_entries(2, vec![NcPoly::zero(), xi.adjoint(), xi.clone(), NcPoly::zero()])?;
    let (span, e, map) = match suite {
        Suite::Prop36 => (SpanningSet::matrix_units(2), Expectation::Full, EtaMap::Eta),
        _ => (SpanningSet::diagonal(2), Expectation::Diagonal, EtaMap::Eta0),
    };
    let mut rep = SuiteReport::new(suite, degree, S::EXACT, f.label());
    rep.check("X = [[0, ξ*], [ξ, 0]], ξ = a*", verify_conjugate_eta(&f, &big_a, &x, &span, e, map, degree)?);
    rep.control("X = 0", verify_conjugate_eta(&f, &big_a, &MatrixOverPoly::zero(2), &span, e, map, 2)?);
    let x_norm = squared_norm(&f, &x)?;
    let xi_m = MatrixOverPoly::scalar_poly(xi.clone());
    let pair = squared_norm(&f, &xi_m)? + squared_norm(&f, &xi_m.adjoint())?;
    rep.quantity("2·||X||² − (||ξ||² + ||ξ*||²)", &(S::from_i64(2) * x_norm.clone() - pair), &S::zero());
    rep.quantity("||X||²", &x_norm, &S::one());
    Ok(rep)
}

const ENTRY_NAMES: [&str; 4] = ["c11", "c12", "c21", "c22"];

fn circular_entries<S: Scalar>(degree: usize) -> Result<(TraceFunctional<S>, MatrixOverPoly<S>)> {
    let mut b = TraceFunctional::<S>::builder().max_degree((degree + 4).max(12)).moment_order((degree + 4).max(40));
    for n in ENTRY_NAMES {
        b = b.circular(n, S::one())?;
    }
    let f = b.label("free circular c11, c12, c21, c22").build()?;
    let c = MatrixOverPoly::from_entries(2, ENTRY_NAMES.iter().map(|n| g::<S>(n)).collect())?;
    Ok((f, c))
}

fn matrix_entries<S: Scalar>(degree: usize) -> Result<SuiteReport> {
    let (f, c) = circular_entries::<S>(degree)?;
    let d = 2i64;
    let xi: Vec<Vec<NcPoly<S>>> =
        (0..2).map(|i| (0..2).map(|j| g::<S>(ENTRY_NAMES[2 * i + j]).adjoint()).collect()).collect();
    let x = entries_to_matrix_conjugate(&xi)?;
    let mut rep = SuiteReport::new(Suite::Prop41, degree, S::EXACT, f.label());
    rep.check("X = (1/d) C*", verify_matrix_conjugate(&f, &c, &x, degree)?);
    rep.control("X = C", verify_matrix_conjugate(&f, &c, &c, 2)?);
    let mut entries = S::zero();
    for row in &xi {
        for e in row {
            let m = MatrixOverPoly::scalar_poly(e.clone());
            entries = entries + squared_norm(&f, &m)? + squared_norm(&f, &m.adjoint())?;
        }
    }
    let matrix = squared_norm(&f, &x)? + squared_norm(&f, &x.adjoint())?;
    rep.quantity("Σ ||ξ_ij||² + ||ξ_ij*||² − d³(||X||² + ||X*||²)", &(entries.clone() - S::from_i64(d * d * d) * matrix), &S::zero());
    rep.quantity("Σ ||ξ_ij||² + ||ξ_ij*||²", &entries, &S::from_i64(8));
    Ok(rep)
}

fn block_freeness<S: Scalar>(nu: &CompactMeasure, degree: usize) -> Result<SuiteReport> {
    let f = TraceFunctional::<S>::builder()
        .max_degree((degree + 2).max(12))
        .moment_order((degree + 2).max(40))
        .semicircular("a", S::one())
        .rdiagonal("c", nu, RDiagonalRepr::Symmetric)?
        .label(format!("semicircular(a) * rdiagonal[{}](c)", nu.label()))
        .build()?;
    let big_a = block_embed(&g::<S>("a"));
    let big_s = block_embed(&g::<S>("c"));
    let mut rep = SuiteReport::new(Suite::Prop51, degree, S::EXACT, f.label());
    rep.check("A = [[0, a], [a*, 0]] vs S = [[0, c], [c*, 0]]", check_freeness(&f, &[("A".into(), big_a)], &[("S".into(), big_s)], degree)?);
    let s = g::<S>("a");
    let s2 = &s * &s;
    rep.control("a vs a²", check_freeness_polys(&f, &[("a", s)], &[("a²", s2)], 4)?);
    Ok(rep)
}

fn circular_matrix<S: Scalar>(degree: usize) -> Result<SuiteReport> {
    let (f, c) = circular_entries::<S>(degree.max(6))?;
    let mut rep = SuiteReport::new(Suite::Prop53, degree, S::EXACT, f.label());
    let cc = &c.adjoint() * &c;
    let expected = [2, 8, 40];
    for (k, e) in expected.iter().enumerate() {
        let v = cc.pow(k + 1).trace(&f)?;
        rep.quantity(&format!("φ₂((C*C)^{})", k + 1), &v, &S::from_i64(*e));
    }
    let units: Vec<(String, MatrixOverPoly<S>)> =
        (0..2).flat_map(|i| (0..2).map(move |j| (format!("E{}{}", i + 1, j + 1), MatrixOverPoly::unit(2, i, j)))).collect();
    rep.check("C vs scalar matrices", check_freeness(&f, &[("C".into(), c.clone())], &units, degree)?);
    let diag = MatrixOverPoly::from_entries(2, vec![g::<S>("c11"), NcPoly::zero(), NcPoly::zero(), g::<S>("c11")])?;
    rep.control("diag(c11, c11) vs scalar matrices", check_freeness(&f, &[("D".into(), diag)], &units, 4)?);
    Ok(rep)
}

fn self_conjugate<S: Scalar>(degree: usize) -> Result<SuiteReport> {
    let (f, c) = circular_entries::<S>(degree)?;
    let cs = c.adjoint();
    let half = S::ratio(1, 2);
    let s1 = (&c + &cs).scale(&half);
    // (C − C*)/(2i)
    let s2 = (&c - &cs).scale(&(half.clone() * S::imag_unit().inv().expect("i is invertible")));
    let cand = ConjugateCandidate::new().matrix_selfadjoint("s1", s1.clone(), s1.clone()).matrix_selfadjoint("s2", s2.clone(), s2.clone());
    let mut rep = SuiteReport::new(Suite::Lemma54, degree, S::EXACT, f.label());
    let report = verify_conjugate(&f, &cand, &SpanningSet::matrix_units(2), degree)?;
    let fisher = fisher_from_candidates(&f, &cand, &report);
    rep.check("{(C+C*)/2, (C−C*)/2i} self-conjugate over M₂(C)", report);
    if let Ok(v) = fisher {
        rep.quantity("Σ ||s_i||²", &v, &S::from_i64(2));
    }
    let bad = ConjugateCandidate::new().matrix_selfadjoint("s1", s1.clone(), s1.scale(&S::from_i64(2)));
    rep.control("candidate 2·s1", verify_conjugate(&f, &bad, &SpanningSet::matrix_units(2), 2)?);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.to_string().parse::<Suite>().unwrap(), s);
        }
        assert!("prop99".parse::<Suite>().is_err());
    }

    #[test]
    fn small_suites_pass() {
        for s in [Suite::Lemma39, Suite::Prop38, Suite::Prop36, Suite::Prop37] {
            let r = run_suite(s, &SuiteOptions { degree: Some(4), ..Default::default() }).unwrap();
            assert!(r.passed, "{}", serde_json::to_string_pretty(&r).unwrap());
        }
    }
}

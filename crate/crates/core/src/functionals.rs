//! Analytic functionals of compactly supported measures: free Fisher
//! information, logarithmic energy, free entropy, conjugate densities and the
//! right-hand sides of the matrix-entry bounds.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{input, Error, Result};
use crate::measures::{CompactMeasure, DensityPiece};
use crate::quadrature::{Point, TanhSinh};

/// Multiplier in `Φ*(μ) = κ ∫ ρ³`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FisherConstant {
    pub kappa: f64,
}

impl Default for FisherConstant {
    fn default() -> Self {
        FisherConstant { kappa: 4.0 * PI * PI / 3.0 }
    }
}

impl FisherConstant {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return input(format!("kappa must be positive and finite, got {kappa}"));
        }
        Ok(FisherConstant { kappa })
    }
}

/// Additive constant in `χ*(μ) = E(μ) + 3/4 + log(2π)/2`.
pub fn entropy_offset() -> f64 {
    0.75 + 0.5 * (2.0 * PI).ln()
}

const THM11_AGREEMENT: f64 = 1e-8;

fn quad() -> TanhSinh {
    TanhSinh { abs_tol: 1e-14, rel_tol: 1e-13, min_level: 3, max_level: 14 }
}

fn cube_diverges(p: &DensityPiece, lo_weight: f64, hi_weight: f64) -> bool {
    3.0 * p.lo_exponent + lo_weight <= -1.0 || 3.0 * p.hi_exponent + hi_weight <= -1.0
}

/// `κ ∫ ρ³`, or `+∞` when `μ` has an atom or `ρ ∉ L³`.
pub fn fisher_of_measure(mu: &CompactMeasure, kappa: FisherConstant) -> Result<f64> {
    if mu.has_atoms() {
        return Ok(f64::INFINITY);
    }
    let q = quad();
    let mut total = 0.0;
    for p in mu.pieces() {
        if cube_diverges(p, 0.0, 0.0) {
            return Ok(f64::INFINITY);
        }
        total += p.integrate(&q, |pt| p.eval(pt).powi(2))?;
    }
    Ok(kappa.kappa * total)
}

/// `2κ ∫₀^∞ t ρ(t)³ dt` computed directly on the density of `ν`.
pub fn thm11_direct(nu: &CompactMeasure, kappa: FisherConstant) -> Result<f64> {
    if !nu.is_supported_on_nonnegative() {
        return input("the measure must live on [0, ∞)");
    }
    if nu.has_atoms() {
        return Ok(f64::INFINITY);
    }
    let q = quad();
    let mut total = 0.0;
    for p in nu.pieces() {
        let lo_weight = if p.lo == 0.0 { 1.0 } else { 0.0 };
        if cube_diverges(p, lo_weight, 0.0) {
            return Ok(f64::INFINITY);
        }
        total += p.integrate(&q, |pt| pt.x * p.eval(pt).powi(2))?;
    }
    Ok(2.0 * kappa.kappa * total)
}

/// Minimal `Φ*(a, a*)` over `a` with `a*a ~ ν`. Both routes are computed and
/// must agree.
pub fn min_fisher_thm11(nu: &CompactMeasure, kappa: FisherConstant) -> Result<f64> {
    if !nu.is_supported_on_nonnegative() {
        return input("the measure must live on [0, ∞)");
    }
    let via_root = 2.0 * fisher_of_measure(&nu.symmetric_square_root()?, kappa)?;
    let direct = thm11_direct(nu, kappa)?;
    if via_root.is_infinite() || direct.is_infinite() {
        if via_root == direct {
            return Ok(via_root);
        }
        return Err(Error::Consistency(format!("square-root route gives {via_root}, direct route gives {direct}")));
    }
    if (via_root - direct).abs() > THM11_AGREEMENT * via_root.abs().max(1.0) {
        return Err(Error::Consistency(format!(
            "square-root route gives {via_root}, direct route gives {direct}"
        )));
    }
    Ok(via_root)
}

/// `∫_P ρ(t) f(t, s) dt` helpers work in the piece frame so that distances to
/// endpoints stay exact.
fn self_energy(p: &DensityPiece, outer: &TanhSinh, inner: &TanhSinh) -> Result<f64> {
    // 2 ∫ ρ(s) ∫_{lo}^{s} ρ(t) log(s - t) dt ds
    let mut failure = None;
    let value = outer.integrate(p.lo, p.hi, |ps| {
        let rho_s = p.eval(ps);
        if rho_s == 0.0 {
            return 0.0;
        }
        let left = inner.integrate(p.lo, ps.x, |qt| {
            let at = Point { x: qt.x, from_lo: qt.from_lo, from_hi: ps.from_hi + qt.from_hi };
            let r = p.eval(at);
            if r == 0.0 {
                0.0
            } else {
                r * qt.from_hi.ln()
            }
        });
        match left {
            Ok(e) => rho_s * e.value,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(2.0 * value.value)
}

fn cross_energy(a: &DensityPiece, b: &DensityPiece, outer: &TanhSinh, inner: &TanhSinh) -> Result<f64> {
    // a lies to the left of b
    let gap = b.lo - a.hi;
    let mut failure = None;
    let value = outer.integrate(a.lo, a.hi, |ps| {
        let rho_s = a.eval(ps);
        if rho_s == 0.0 {
            return 0.0;
        }
        let r = inner.integrate(b.lo, b.hi, |qt| {
            let r = b.eval(qt);
            if r == 0.0 {
                0.0
            } else {
                r * (gap + ps.from_hi + qt.from_lo).ln()
            }
        });
        match r {
            Ok(e) => rho_s * e.value,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(value.value)
}

/// `∫∫ log|s − t| dμ(s) dμ(t)`; `−∞` whenever `μ` has an atom.
pub fn log_energy(mu: &CompactMeasure) -> Result<f64> {
    if mu.has_atoms() {
        return Ok(f64::NEG_INFINITY);
    }
    let outer = TanhSinh { abs_tol: 1e-12, rel_tol: 1e-11, min_level: 3, max_level: 12 };
    let inner = TanhSinh { abs_tol: 1e-13, rel_tol: 1e-12, min_level: 3, max_level: 12 };
    let pieces = mu.pieces();
    let mut total = 0.0;
    for (i, a) in pieces.iter().enumerate() {
        total += self_energy(a, &outer, &inner)?;
        for b in &pieces[i + 1..] {
            total += 2.0 * cross_energy(a, b, &outer, &inner)?;
        }
    }
    Ok(total)
}

/// `χ*(μ)`; `−∞` whenever `μ` has an atom.
pub fn entropy_of_measure(mu: &CompactMeasure) -> Result<f64> {
    Ok(log_energy(mu)? + entropy_offset())
}

pub fn scaling_fisher(value: f64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return input("scale must be positive");
    }
    Ok(value / (lambda * lambda))
}

pub fn scaling_entropy(value: f64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return input("scale must be positive");
    }
    Ok(value + lambda.ln())
}

/// `h(t) = 2 PV∫ ρ(s)/(t − s) ds`, the conjugate variable of a measure with
/// density, realised as a function on the real line.
#[derive(Clone, Debug)]
pub struct ConjugateDensity {
    mu: CompactMeasure,
}

pub fn conjugate_density(mu: &CompactMeasure) -> Result<ConjugateDensity> {
    if mu.has_atoms() {
        return input("conjugate density needs a measure without atoms");
    }
    Ok(ConjugateDensity { mu: mu.clone() })
}

impl ConjugateDensity {
    pub fn measure(&self) -> &CompactMeasure {
        &self.mu
    }

    const POINT: TanhSinh = TanhSinh { abs_tol: 1e-13, rel_tol: 1e-12, min_level: 3, max_level: 13 };
    /// Inner rule inside `∫h²dμ`: an error δ at t contributes about
    /// 2|h|·δ·ρ(t), so the target loosens where ρ is small.
    fn nested(rho: f64) -> TanhSinh {
        let abs_tol = (1e-12 / rho).clamp(1e-11, 1e-6);
        TanhSinh { abs_tol, rel_tol: 1e-11, min_level: 3, max_level: 13 }
    }

    /// Evaluate at a point of piece `home` given in that piece's frame.
    fn at_point(&self, home: Option<usize>, pt: Point, q: &TanhSinh) -> Result<f64> {
        let t = pt.x;
        let mut total = 0.0;
        for (j, p) in self.mu.pieces().iter().enumerate() {
            if Some(j) == home {
                let rho_t = p.eval(pt);
                let left = q.integrate(p.lo, t, |s| {
                    let at = Point { x: s.x, from_lo: s.from_lo, from_hi: pt.from_hi + s.from_hi };
                    (p.eval(at) - rho_t) / s.from_hi
                })?;
                let right = q.integrate(t, p.hi, |s| {
                    let at = Point { x: s.x, from_lo: pt.from_lo + s.from_lo, from_hi: s.from_hi };
                    -(p.eval(at) - rho_t) / s.from_lo
                })?;
                total += left.value + right.value + rho_t * (pt.from_lo / pt.from_hi).ln();
            } else {
                let dist = |s: Point| {
                    if p.hi <= t {
                        (t - p.hi) + s.from_hi
                    } else {
                        -((p.lo - t) + s.from_lo)
                    }
                };
                total += p.integrate(q, |s| 1.0 / dist(s))?;
            }
        }
        Ok(2.0 * total)
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let pieces = self.mu.pieces();
        match pieces.iter().position(|p| p.lo < t && t < p.hi) {
            Some(j) => self.at_point(Some(j), Point::new(t, pieces[j].lo, pieces[j].hi), &Self::POINT),
            None => self.at_point(None, Point { x: t, from_lo: 0.0, from_hi: 0.0 }, &Self::POINT),
        }
    }

    /// `∫ h² dμ`.
    pub fn norm_squared(&self) -> Result<f64> {
        let outer = TanhSinh { abs_tol: 1e-11, rel_tol: 1e-10, min_level: 3, max_level: 11 };
        let mut total = 0.0;
        for (j, p) in self.mu.pieces().iter().enumerate() {
            let mut failure = None;
            let v = outer.integrate(p.lo, p.hi, |pt| {
                let rho = p.eval(pt);
                if rho == 0.0 {
                    return 0.0;
                }
                match self.at_point(Some(j), pt, &Self::nested(rho)) {
                    Ok(h) => h * h * rho,
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                }
            })?;
            if let Some(e) = failure {
                return Err(e);
            }
            total += v.value;
        }
        Ok(total)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TheoremId {
    T11,
    T12_1,
    T12_2,
    T13,
    T14,
    T15_1,
    T15_2,
}

impl TheoremId {
    pub const ALL: [TheoremId; 7] =
        [TheoremId::T11, TheoremId::T12_1, TheoremId::T12_2, TheoremId::T13, TheoremId::T14, TheoremId::T15_1, TheoremId::T15_2];
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TheoremId::T11 => "T11",
            TheoremId::T12_1 => "T12_1",
            TheoremId::T12_2 => "T12_2",
            TheoremId::T13 => "T13",
            TheoremId::T14 => "T14",
            TheoremId::T15_1 => "T15_1",
            TheoremId::T15_2 => "T15_2",
        };
        f.write_str(s)
    }
}

impl FromStr for TheoremId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .into_iter()
            .find(|t| t.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Input(format!("unknown theorem id `{s}`")))
    }
}

/// What a bound is computed from.
///
/// For `T11`, `T13`, `T14` a measure is the distribution `ν` of `A*A`. For
/// `T12_1`/`T15_1` a measure is again `ν`, realised by the optimal
/// R-diagonal element; a value is `Φ*(A,A*)` or `χ*(A,A*)`. For
/// `T12_2`/`T15_2` a measure is the distribution of `B`; a value is `Φ*(B)`
/// or `χ*(B)`.
#[derive(Clone, Debug)]
pub enum BoundInput {
    Measure(CompactMeasure),
    Value(f64),
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoremBound {
    pub theorem: TheoremId,
    pub d: u32,
    pub kappa: f64,
    #[serde(serialize_with = "ser_real")]
    pub value: f64,
    pub inputs: Value,
    pub formula_trace: String,
}

fn ser_real<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    json_real(*v).serialize(s)
}

/// JSON number, or the strings `"inf"`, `"-inf"`, `"nan"`.
pub fn json_real(v: f64) -> Value {
    if v.is_nan() {
        json!("nan")
    } else if v == f64::INFINITY {
        json!("inf")
    } else if v == f64::NEG_INFINITY {
        json!("-inf")
    } else {
        json!(v)
    }
}

fn need_measure<'a>(id: TheoremId, inp: &'a BoundInput) -> Result<&'a CompactMeasure> {
    match inp {
        BoundInput::Measure(m) => Ok(m),
        BoundInput::Value(_) => input(format!("{id} needs a measure")),
    }
}

pub fn theorem_bound(id: TheoremId, inp: &BoundInput, d: u32, kappa: FisherConstant) -> Result<TheoremBound> {
    if d == 0 {
        return input("d must be at least 1");
    }
    let df = d as f64;
    let d2 = df * df;
    let d3 = d2 * df;
    let ln_d = df.ln();
    let described = match inp {
        BoundInput::Measure(m) => json!({ "measure": m.label() }),
        BoundInput::Value(v) => json!({ "value": json_real(*v) }),
    };
    let (value, trace) = match id {
        TheoremId::T11 => {
            let nu = need_measure(id, inp)?;
            let v = min_fisher_thm11(nu, kappa)?;
            (v, format!("2·Φ*(μ) = 2κ∫tρ_ν(t)³dt = {v}"))
        }
        TheoremId::T13 => {
            let nu = need_measure(id, inp)?;
            let t11 = min_fisher_thm11(nu, kappa)?;
            (d3 * t11, format!("d³·2Φ*(μ) = {d3}·{t11}"))
        }
        TheoremId::T14 => {
            let nu = need_measure(id, inp)?;
            let chi = entropy_of_measure(&nu.symmetric_square_root()?)?;
            (2.0 * d2 * (chi - 0.5 * ln_d), format!("2d²(χ*(μ) − log(d)/2) = 2·{d2}·({chi} − {})", 0.5 * ln_d))
        }
        TheoremId::T12_1 => {
            let (phi, what) = match inp {
                BoundInput::Value(v) => (*v, "Φ*(A,A*)"),
                BoundInput::Measure(nu) => (min_fisher_thm11(nu, kappa)?, "Φ*(A,A*) = 2Φ*(μ)"),
            };
            (d3 * phi, format!("d³·{what} = {d3}·{phi}"))
        }
        TheoremId::T12_2 => {
            let (phi, what) = match inp {
                BoundInput::Value(v) => (*v, "Φ*(B)"),
                BoundInput::Measure(m) => (fisher_of_measure(m, kappa)?, "Φ*(B) = κ∫ρ_B³"),
            };
            (d3 * phi, format!("d³·{what} = {d3}·{phi}"))
        }
        TheoremId::T15_1 => {
            let (chi, what) = match inp {
                BoundInput::Value(v) => (*v, "χ*(A,A*)"),
                BoundInput::Measure(nu) => {
                    (2.0 * entropy_of_measure(&nu.symmetric_square_root()?)?, "χ*(A,A*) = 2χ*(μ)")
                }
            };
            (d2 * (chi - ln_d), format!("d²({what} − log d) = {d2}·({chi} − {ln_d})"))
        }
        TheoremId::T15_2 => {
            let (chi, what) = match inp {
                BoundInput::Value(v) => (*v, "χ*(B)"),
                BoundInput::Measure(m) => (entropy_of_measure(m)?, "χ*(B)"),
            };
            (d2 * (chi - 0.5 * ln_d), format!("d²({what} − log(d)/2) = {d2}·({chi} − {})", 0.5 * ln_d))
        }
    };
    Ok(TheoremBound { theorem: id, d, kappa: kappa.kappa, value, inputs: described, formula_trace: trace })
}

/// Uniform output record for a functional evaluation.
#[derive(Clone, Debug, Serialize)]
pub struct FunctionalRecord {
    pub functional: String,
    pub inputs: Value,
    pub kappa: Option<f64>,
    #[serde(serialize_with = "ser_real")]
    pub value: f64,
    pub tolerance: f64,
    pub formula_trace: String,
}

impl FunctionalRecord {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("record serializes")
    }
}

impl From<&TheoremBound> for FunctionalRecord {
    fn from(b: &TheoremBound) -> Self {
        FunctionalRecord {
            functional: format!("theorem_bound:{}", b.theorem),
            inputs: json!({ "input": b.inputs, "d": b.d }),
            kappa: Some(b.kappa),
            value: b.value,
            tolerance: 1e-8,
            formula_trace: b.formula_trace.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k() -> FisherConstant {
        FisherConstant::default()
    }

    #[test]
    fn semicircle_fisher_is_one() {
        let v = fisher_of_measure(&CompactMeasure::semicircle(2.0).unwrap(), k()).unwrap();
        assert!((v - 1.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn uniform_fisher() {
        let v = fisher_of_measure(&CompactMeasure::uniform(-1.0, 1.0).unwrap(), k()).unwrap();
        assert!((v - PI * PI / 3.0).abs() < 1e-9);
    }

    #[test]
    fn atoms_are_infinite() {
        assert_eq!(fisher_of_measure(&CompactMeasure::point_mass(0.0), k()).unwrap(), f64::INFINITY);
        assert_eq!(min_fisher_thm11(&CompactMeasure::point_mass(1.0), k()).unwrap(), f64::INFINITY);
        assert_eq!(entropy_of_measure(&CompactMeasure::point_mass(3.0)).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn quartercircle_minimum_is_two() {
        let v = min_fisher_thm11(&CompactMeasure::quartercircle(4.0).unwrap(), k()).unwrap();
        assert!((v - 2.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn semicircle_energy() {
        let e = log_energy(&CompactMeasure::semicircle(2.0).unwrap()).unwrap();
        assert!((e + 0.25).abs() < 1e-8, "{e}");
    }

    #[test]
    fn uniform_entropy() {
        let v = entropy_of_measure(&CompactMeasure::uniform(-1.0, 1.0).unwrap()).unwrap();
        let expect = 2f64.ln() - 1.5 + entropy_offset();
        assert!((v - expect).abs() < 1e-8, "{v}");
    }

    #[test]
    fn semicircle_is_self_conjugate() {
        let h = conjugate_density(&CompactMeasure::semicircle(2.0).unwrap()).unwrap();
        for i in 0..20 {
            let t = -1.9 + 0.2 * i as f64;
            assert!((h.eval(t).unwrap() - t).abs() < 1e-6);
        }
    }

    #[test]
    fn theorem_ids_round_trip() {
        for id in TheoremId::ALL {
            assert_eq!(id.to_string().parse::<TheoremId>().unwrap(), id);
        }
    }

    #[test]
    fn bounds_scale_with_d() {
        let nu = BoundInput::Measure(CompactMeasure::quartercircle(4.0).unwrap());
        let t13 = theorem_bound(TheoremId::T13, &nu, 2, k()).unwrap();
        assert!((t13.value - 16.0).abs() < 1e-7);
        assert!(theorem_bound(TheoremId::T13, &nu, 0, k()).is_err());
        let json = serde_json::to_value(&t13).unwrap();
        assert_eq!(json["theorem"], "T13");
    }
}

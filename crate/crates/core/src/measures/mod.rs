//! Compactly supported probability measures on the real line.
//!
//! A [`CompactMeasure`] is a finite set of atoms plus density pieces on closed
//! intervals. Densities are callables receiving a [`Point`], so endpoint
//! singularities such as `t^{-1/2}` can be evaluated without cancellation.
//! When every ingredient has rational moments the measure also carries an
//! exact moment oracle, which the moment engine uses in rational mode.

mod descriptor;
mod spline;

pub use descriptor::{MeasureDescriptor, PieceDescriptor};
pub use spline::NaturalSpline;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use faer::{Mat, Side};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{input, Error, Result};
use crate::quadrature::{Point, TanhSinh};
use crate::scalar::{catalan, rat_from_f64};

pub type DensityFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
pub type ExactMoments = Arc<dyn Fn(usize) -> BigRational + Send + Sync>;

/// Largest moment order served by [`CompactMeasure::moment`].
pub const MAX_MOMENT_ORDER: usize = 64;

const MASS_TOL: f64 = 1e-10;

/// A density on `[lo, hi]` with declared power-law behaviour at the endpoints:
/// near `lo` the density is `O((t - lo)^lo_exponent)`, likewise at `hi`.
#[derive(Clone)]
pub struct DensityPiece {
    pub lo: f64,
    pub hi: f64,
    pub lo_exponent: f64,
    pub hi_exponent: f64,
    density: DensityFn,
    exact: Option<ExactMoments>,
}

impl fmt::Debug for DensityPiece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityPiece")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("lo_exponent", &self.lo_exponent)
            .field("hi_exponent", &self.hi_exponent)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

impl DensityPiece {
    pub fn new(
        lo: f64,
        hi: f64,
        lo_exponent: f64,
        hi_exponent: f64,
        density: impl Fn(Point) -> f64 + Send + Sync + 'static,
    ) -> Self {
        DensityPiece { lo, hi, lo_exponent, hi_exponent, density: Arc::new(density), exact: None }
    }

    /// Attach exact moments `k -> ∫ t^k ρ(t) dt`.
    pub fn with_exact(mut self, exact: impl Fn(usize) -> BigRational + Send + Sync + 'static) -> Self {
        self.exact = Some(Arc::new(exact));
        self
    }

    pub fn eval(&self, p: Point) -> f64 {
        (self.density)(p)
    }

    /// Density at `x`, zero outside the piece.
    pub fn density_at(&self, x: f64) -> f64 {
        if x <= self.lo || x >= self.hi {
            return 0.0;
        }
        self.eval(Point::new(x, self.lo, self.hi))
    }

    pub fn exact_moment(&self, k: usize) -> Option<BigRational> {
        self.exact.as_ref().map(|f| f(k))
    }

    pub fn scaled(&self, w: f64) -> DensityPiece {
        let inner = self.density.clone();
        let exact = self.exact.clone().map(|e| {
            let wr = rat_from_f64(w);
            Arc::new(move |k| e(k) * &wr) as ExactMoments
        });
        DensityPiece { density: Arc::new(move |p| w * inner(p)), exact, ..self.clone() }
    }

    /// Restriction to the sub-interval `[lo, hi]`.
    fn restrict(&self, lo: f64, hi: f64) -> DensityPiece {
        let inner = self.density.clone();
        let (olo, ohi) = (self.lo, self.hi);
        DensityPiece {
            lo,
            hi,
            lo_exponent: if lo == olo { self.lo_exponent } else { 0.0 },
            hi_exponent: if hi == ohi { self.hi_exponent } else { 0.0 },
            density: Arc::new(move |p: Point| inner(p.reframe(lo, hi, olo, ohi))),
            exact: None,
        }
    }

    pub fn integrate(&self, quad: &TanhSinh, weight: impl Fn(Point) -> f64) -> Result<f64> {
        quad.integrate(self.lo, self.hi, |p| {
            let rho = self.eval(p);
            if rho == 0.0 {
                0.0
            } else {
                weight(p) * rho
            }
        })
        .map(|e| e.value)
    }
}

/// A compactly supported probability measure. Immutable once built.
#[derive(Clone)]
pub struct CompactMeasure {
    atoms: Vec<(f64, f64)>,
    pieces: Vec<DensityPiece>,
    piece_mass: Vec<f64>,
    radius: f64,
    exact: Option<ExactMoments>,
    label: String,
}

impl fmt::Debug for CompactMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CompactMeasure")
            .field("label", &self.label)
            .field("atoms", &self.atoms)
            .field("pieces", &self.pieces)
            .field("radius", &self.radius)
            .finish()
    }
}

impl fmt::Display for CompactMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// Truncated moment sequence `m_0..m_K`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSequence {
    pub moments: Vec<f64>,
}

impl MomentSequence {
    pub fn order(&self) -> usize {
        self.moments.len().saturating_sub(1)
    }

    /// Smallest eigenvalue of the diagonally normalized Hankel matrix
    /// `(m_{i+j})_{0<=i,j<=K/2}`.
    pub fn hankel_min_eigenvalue(&self) -> f64 {
        let n = self.order() / 2 + 1;
        let scale: Vec<f64> = (0..n)
            .map(|i| {
                let d = self.moments[2 * i];
                if d > 0.0 {
                    1.0 / d.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        let h = Mat::<f64>::from_fn(n, n, |i, j| self.moments[i + j] * scale[i] * scale[j]);
        let ev = h.self_adjoint_eigenvalues(Side::Lower).expect("symmetric eigenvalues");
        ev.into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn is_hankel_psd(&self, tol: f64) -> bool {
        self.hankel_min_eigenvalue() >= -tol
    }
}

fn pow_rat(x: &BigRational, k: usize) -> BigRational {
    num_traits::pow(x.clone(), k)
}

fn binomial(n: usize, k: usize) -> BigInt {
    let mut b = BigInt::one();
    for i in 0..k {
        b = b * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    b
}

/// Moments of `c + X` from the moments of `X`.
fn shifted(c: BigRational, base: impl Fn(usize) -> BigRational) -> impl Fn(usize) -> BigRational {
    move |k| {
        (0..=k).fold(BigRational::zero(), |acc, j| {
            acc + BigRational::from_integer(binomial(k, j)) * pow_rat(&c, k - j) * base(j)
        })
    }
}

// ---- standard pieces (each a probability density) ----

fn semicircle_piece(center: f64, r: f64, r2: Option<BigRational>) -> DensityPiece {
    let c = 2.0 / (PI * r * r);
    let piece = DensityPiece::new(center - r, center + r, 0.5, 0.5, move |p| c * (p.from_lo * p.from_hi).sqrt());
    match r2 {
        Some(r2) => {
            let q = r2 / BigRational::from_integer(4.into());
            piece.with_exact(shifted(rat_from_f64(center), move |k| {
                if k % 2 == 1 {
                    BigRational::zero()
                } else {
                    BigRational::from_integer(catalan(k / 2)) * pow_rat(&q, k / 2)
                }
            }))
        }
        None => piece,
    }
}

fn quartercircle_piece(lo: f64, alpha: f64) -> DensityPiece {
    let c = 2.0 / (alpha * PI);
    let q = rat_from_f64(alpha) / BigRational::from_integer(4.into());
    DensityPiece::new(lo, lo + alpha, -0.5, 0.5, move |p| c * (p.from_hi / p.from_lo).sqrt()).with_exact(shifted(
        rat_from_f64(lo),
        move |k| BigRational::from_integer(catalan(k)) * pow_rat(&q, k),
    ))
}

fn uniform_piece(a: f64, b: f64) -> DensityPiece {
    let c = 1.0 / (b - a);
    let (ra, rb) = (rat_from_f64(a), rat_from_f64(b));
    DensityPiece::new(a, b, 0.0, 0.0, move |_| c).with_exact(move |k| {
        (pow_rat(&rb, k + 1) - pow_rat(&ra, k + 1)) / ((&rb - &ra) * BigRational::from_integer((k + 1).into()))
    })
}

fn poly_piece(lo: f64, hi: f64, coeffs: &[f64]) -> Result<DensityPiece> {
    let (rl, rh) = (rat_from_f64(lo), rat_from_f64(hi));
    let rc: Vec<BigRational> = coeffs.iter().map(|&c| rat_from_f64(c)).collect();
    let raw = move |k: usize| -> BigRational {
        rc.iter().enumerate().fold(BigRational::zero(), |acc, (j, c)| {
            let e = k + j + 1;
            acc + c * (pow_rat(&rh, e) - pow_rat(&rl, e)) / BigRational::from_integer(e.into())
        })
    };
    let z = raw(0);
    if z <= BigRational::zero() {
        return input("polynomial density must have positive mass");
    }
    let zf = z.to_f64().unwrap();
    let cs = coeffs.to_vec();
    let eval = move |x: f64| cs.iter().rev().fold(0.0, |acc, c| acc * x + c) / zf;
    for i in 0..=256 {
        let x = lo + (hi - lo) * i as f64 / 256.0;
        if eval(x) < -1e-12 {
            return input(format!("polynomial density is negative at {x}"));
        }
    }
    Ok(DensityPiece::new(lo, hi, 0.0, 0.0, move |p| eval(p.x).max(0.0)).with_exact(move |k| raw(k) / &z))
}

fn beta_piece(a: f64, b: f64, lo: f64, hi: f64) -> Result<DensityPiece> {
    if !(a > 0.0 && b > 0.0) {
        return input("beta parameters must be positive");
    }
    let w = hi - lo;
    let log_norm = statrs::function::beta::ln_beta(a, b) + (a + b - 1.0) * w.ln();
    let density = move |p: Point| {
        (((a - 1.0) * p.from_lo.ln()) + ((b - 1.0) * p.from_hi.ln()) - log_norm).exp()
    };
    let (ra, rb) = (rat_from_f64(a), rat_from_f64(b));
    let (rl, rw) = (rat_from_f64(lo), rat_from_f64(w));
    let std_moment = move |j: usize| -> BigRational {
        (0..j).fold(BigRational::one(), |acc, r| {
            let r = BigRational::from_integer(r.into());
            acc * (&ra + &r) / (&ra + &rb + &r)
        })
    };
    let exact = shifted(rl, move |j| pow_rat(&rw, j) * std_moment(j));
    Ok(DensityPiece::new(lo, hi, a - 1.0, b - 1.0, density).with_exact(exact))
}

fn table_pieces(points: &[(f64, f64)]) -> Result<Vec<DensityPiece>> {
    let spline = Arc::new(NaturalSpline::new(points)?);
    let knots = spline.knots().to_vec();
    Ok((0..knots.len() - 1)
        .map(|i| {
            let s = spline.clone();
            DensityPiece::new(knots[i], knots[i + 1], 0.0, 0.0, move |p| s.eval_segment(i, p.from_lo, p.from_hi).max(0.0))
        })
        .collect())
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

impl CompactMeasure {
    /// Build and validate a measure. The exact moment oracle is derived from
    /// the atoms and pieces when every piece carries one.
    pub fn new(atoms: Vec<(f64, f64)>, pieces: Vec<DensityPiece>, radius: Option<f64>, label: impl Into<String>) -> Result<Self> {
        let exact = if pieces.iter().all(|p| p.exact.is_some()) {
            let atoms_r: Vec<(BigRational, BigRational)> =
                atoms.iter().map(|&(x, m)| (rat_from_f64(x), rat_from_f64(m))).collect();
            let ps = pieces.clone();
            Some(Arc::new(move |k: usize| {
                let a = atoms_r.iter().fold(BigRational::zero(), |acc, (x, m)| acc + pow_rat(x, k) * m);
                ps.iter().fold(a, |acc, p| acc + p.exact_moment(k).unwrap())
            }) as ExactMoments)
        } else {
            None
        };
        Self::assemble(atoms, pieces, radius, exact, label.into())
    }

    fn assemble(
        mut atoms: Vec<(f64, f64)>,
        mut pieces: Vec<DensityPiece>,
        radius: Option<f64>,
        exact: Option<ExactMoments>,
        label: String,
    ) -> Result<Self> {
        for &(x, m) in &atoms {
            if !(m > 0.0 && m <= 1.0 + MASS_TOL) || !x.is_finite() {
                return input(format!("atom ({x}, {m}) must have finite location and mass in (0,1]"));
            }
        }
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        pieces.retain(|p| p.hi > p.lo);
        pieces.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap());
        for p in &pieces {
            if !(p.lo.is_finite() && p.hi.is_finite()) {
                return input("density pieces must be bounded");
            }
        }
        for w in pieces.windows(2) {
            if w[1].lo < w[0].hi {
                return input(format!("pieces [{}, {}] and [{}, {}] overlap", w[0].lo, w[0].hi, w[1].lo, w[1].hi));
            }
        }
        let extent = atoms
            .iter()
            .map(|a| a.0.abs())
            .chain(pieces.iter().flat_map(|p| [p.lo.abs(), p.hi.abs()]))
            .fold(0.0, f64::max);
        let radius = match radius {
            Some(r) if r + 1e-12 * r.max(1.0) < extent => {
                return input(format!("declared radius {r} does not contain the support (extent {extent})"))
            }
            Some(r) => r,
            None => extent,
        };
        let quad = TanhSinh::with_tol(1e-13);
        let mut piece_mass = Vec::with_capacity(pieces.len());
        for p in &pieces {
            if p.lo_exponent <= -1.0 || p.hi_exponent <= -1.0 {
                return input("endpoint exponents must exceed -1 for an integrable density");
            }
            piece_mass.push(p.integrate(&quad, |_| 1.0)?);
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum::<f64>() + piece_mass.iter().sum::<f64>();
        if (total - 1.0).abs() > MASS_TOL {
            return input(format!("total mass is {total}, expected 1"));
        }
        Ok(CompactMeasure { atoms, pieces, piece_mass, radius, exact, label })
    }

    pub fn point_mass(c: f64) -> Self {
        Self::new(vec![(c, 1.0)], vec![], None, format!("pointmass({})", fmt_num(c))).expect("valid point mass")
    }

    pub fn discrete(atoms: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(atoms, vec![], None, "discrete")
    }

    /// Semicircle law of radius `r` centred at 0.
    pub fn semicircle(r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return input("semicircle radius must be positive");
        }
        let r2 = rat_from_f64(r);
        let piece = semicircle_piece(0.0, r, Some(&r2 * &r2));
        Self::new(vec![], vec![piece], None, format!("semicircle({})", fmt_num(r)))
    }

    /// Semicircle law of variance `v` (radius `2√v`), exact whenever `v` is.
    pub fn semicircle_variance(v: f64) -> Result<Self> {
        if !(v > 0.0) {
            return input("variance must be positive");
        }
        let r2 = rat_from_f64(v) * BigRational::from_integer(4.into());
        let piece = semicircle_piece(0.0, 2.0 * v.sqrt(), Some(r2));
        Self::new(vec![], vec![piece], None, format!("semicircle(variance={})", fmt_num(v)))
    }

    /// Quarter-circle law on `[0, α]` with density `2/(απ)·√((α-t)/t)`.
    pub fn quartercircle(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return input("quarter-circle parameter must be positive");
        }
        Self::new(vec![], vec![quartercircle_piece(0.0, alpha)], None, format!("quartercircle({})", fmt_num(alpha)))
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(b > a) {
            return input("uniform needs a < b");
        }
        Self::new(vec![], vec![uniform_piece(a, b)], None, format!("uniform({},{})", fmt_num(a), fmt_num(b)))
    }

    /// Normalized polynomial density `Σ c_j t^j` on `[lo, hi]`.
    pub fn poly(lo: f64, hi: f64, coeffs: &[f64]) -> Result<Self> {
        Self::new(vec![], vec![poly_piece(lo, hi, coeffs)?], None, format!("poly({lo},{hi};{coeffs:?})"))
    }

    /// Beta(a, b) law transported to `[lo, hi]`.
    pub fn beta(a: f64, b: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(hi > lo) {
            return input("beta support needs lo < hi");
        }
        Self::new(vec![], vec![beta_piece(a, b, lo, hi)?], None, format!("beta({a},{b},{lo},{hi})"))
    }

    /// Density tabulated at `(t, ρ(t))` pairs, interpolated by a natural cubic
    /// spline, clamped at zero and normalized.
    pub fn table(points: &[(f64, f64)]) -> Result<Self> {
        let pieces = table_pieces(points)?;
        let quad = TanhSinh::with_tol(1e-13);
        let mut mass = 0.0;
        for p in &pieces {
            mass += p.integrate(&quad, |_| 1.0)?;
        }
        if !(mass > 0.0) {
            return input("tabulated density has no mass");
        }
        let pieces = pieces.iter().map(|p| p.scaled(1.0 / mass)).collect();
        Self::new(vec![], pieces, None, "table")
    }

    /// Parse a built-in name such as `semicircle(2)`, `quartercircle(4)`,
    /// `uniform(0,1)`, `pointmass(1)` or `beta(2,2,-1,1)`.
    pub fn from_name(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, args) = match spec.find('(') {
            Some(i) if spec.ends_with(')') => (&spec[..i], &spec[i + 1..spec.len() - 1]),
            _ => (spec, ""),
        };
        let args: Vec<f64> = if args.trim().is_empty() {
            vec![]
        } else {
            args.split(',')
                .map(|a| a.trim().parse::<f64>().map_err(|_| Error::Input(format!("bad number `{a}` in `{spec}`"))))
                .collect::<Result<_>>()?
        };
        let arg = |i: usize, default: f64| args.get(i).copied().unwrap_or(default);
        match name.trim().to_ascii_lowercase().as_str() {
            "semicircle" => Self::semicircle(arg(0, 2.0)),
            "quartercircle" | "quarter-circle" => Self::quartercircle(arg(0, 4.0)),
            "uniform" => Self::uniform(arg(0, 0.0), arg(1, 1.0)),
            "pointmass" | "delta" => Ok(Self::point_mass(arg(0, 0.0))),
            "beta" => Self::beta(arg(0, 2.0), arg(1, 2.0), arg(2, 0.0), arg(3, 1.0)),
            other => input(format!("unknown measure `{other}`")),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn pieces(&self) -> &[DensityPiece] {
        &self.pieces
    }

    pub fn piece_masses(&self) -> &[f64] {
        &self.piece_mass
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn has_atoms(&self) -> bool {
        !self.atoms.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum::<f64>() + self.piece_mass.iter().sum::<f64>()
    }

    /// Smallest and largest point of the support.
    pub fn support(&self) -> (f64, f64) {
        let lo = self.atoms.iter().map(|a| a.0).chain(self.pieces.iter().map(|p| p.lo)).fold(f64::INFINITY, f64::min);
        let hi = self.atoms.iter().map(|a| a.0).chain(self.pieces.iter().map(|p| p.hi)).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// Total density at `x` (atoms excluded).
    pub fn density(&self, x: f64) -> f64 {
        self.pieces.iter().map(|p| p.density_at(x)).sum()
    }

    /// `∫ w dμ` for a weight given on nodes.
    pub fn integrate(&self, w: impl Fn(Point) -> f64) -> Result<f64> {
        let quad = TanhSinh::with_tol(1e-13);
        let mut total = 0.0;
        for &(x, m) in &self.atoms {
            total += m * w(Point { x, from_lo: 0.0, from_hi: 0.0 });
        }
        for p in &self.pieces {
            total += p.integrate(&quad, &w)?;
        }
        Ok(total)
    }

    fn check_order(k: usize) -> Result<()> {
        if k > MAX_MOMENT_ORDER {
            return Err(Error::Resource(format!("moment order {k} exceeds {MAX_MOMENT_ORDER}")));
        }
        Ok(())
    }

    /// `∫ t^k dμ(t)` by quadrature.
    pub fn moment(&self, k: usize) -> Result<f64> {
        Self::check_order(k)?;
        self.integrate(|p| p.x.powi(k as i32))
    }

    /// `∫ |t|^k dμ(t)`, also for fractional `k`.
    pub fn abs_moment(&self, k: f64) -> Result<f64> {
        self.integrate(|p| p.x.abs().powf(k))
    }

    pub fn exact_moment(&self, k: usize) -> Option<BigRational> {
        self.exact.as_ref().map(|f| f(k))
    }

    pub fn exact_moments(&self, upto: usize) -> Option<Vec<BigRational>> {
        self.exact.as_ref().map(|f| (0..=upto).map(|k| f(k)).collect())
    }

    pub fn moments(&self, upto: usize) -> Result<MomentSequence> {
        let moments = (0..=upto).map(|k| self.moment(k)).collect::<Result<Vec<_>>>()?;
        Ok(MomentSequence { moments })
    }

    pub fn is_supported_on_nonnegative(&self) -> bool {
        self.atoms.iter().all(|a| a.0 >= 0.0) && self.pieces.iter().all(|p| p.lo >= 0.0)
    }

    /// The symmetric measure `μ` with `μ(S) = ν({s² : s ∈ S})` for symmetric `S`.
    pub fn symmetric_square_root(&self) -> Result<Self> {
        if !self.is_supported_on_nonnegative() {
            return input("symmetric square root needs a measure on [0, ∞)");
        }
        let mut atoms = Vec::new();
        for &(x, m) in &self.atoms {
            if x == 0.0 {
                atoms.push((0.0, m));
            } else {
                let r = x.sqrt();
                atoms.push((-r, 0.5 * m));
                atoms.push((r, 0.5 * m));
            }
        }
        let mut pieces = Vec::new();
        for piece in &self.pieces {
            let (sl, sh) = (piece.lo.sqrt(), piece.hi.sqrt());
            let at_zero = piece.lo == 0.0;
            let inner_exp = if at_zero { 1.0 + 2.0 * piece.lo_exponent } else { piece.lo_exponent };
            let pos = piece.clone();
            pieces.push(DensityPiece::new(sl, sh, inner_exp, piece.hi_exponent, move |p: Point| {
                root_density(&pos, p.x, p.from_lo, p.from_hi, sl, sh, at_zero.then_some(inner_exp))
            }));
            let neg = piece.clone();
            pieces.push(DensityPiece::new(-sh, -sl, piece.hi_exponent, inner_exp, move |p: Point| {
                root_density(&neg, -p.x, p.from_hi, p.from_lo, sl, sh, at_zero.then_some(inner_exp))
            }));
        }
        let exact = self.exact.clone().map(|e| {
            Arc::new(move |k: usize| if k % 2 == 1 { BigRational::zero() } else { e(k / 2) }) as ExactMoments
        });
        Self::assemble(atoms, pieces, Some(self.radius.sqrt()), exact, format!("sqrt[{}]", self.label))
    }

    /// Distribution of `t²` under `μ`.
    pub fn push_square(&self) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = Vec::new();
        for &(x, m) in &self.atoms {
            let y = x * x;
            match atoms.iter_mut().find(|a| a.0 == y) {
                Some(a) => a.1 += m,
                None => atoms.push((y, m)),
            }
        }
        let mut halves = Vec::new();
        for p in &self.pieces {
            if p.lo < 0.0 && p.hi > 0.0 {
                halves.push(p.restrict(p.lo, 0.0));
                halves.push(p.restrict(0.0, p.hi));
            } else {
                halves.push(p.clone());
            }
        }
        let mut mapped = Vec::new();
        for p in halves {
            let (l, h) = (p.lo, p.hi);
            if l >= 0.0 {
                let lo_exp = if l == 0.0 { 0.5 * (p.lo_exponent - 1.0) } else { p.lo_exponent };
                let hi_exp = p.hi_exponent;
                mapped.push(DensityPiece::new(l * l, h * h, lo_exp, hi_exp, move |q: Point| {
                    let t = q.x.sqrt();
                    if t == 0.0 {
                        return 0.0;
                    }
                    p.eval(Point { x: t, from_lo: q.from_lo / (t + l), from_hi: q.from_hi / (h + t) }) / (2.0 * t)
                }));
            } else {
                let (al, ah) = (-l, -h);
                let lo_exp = if h == 0.0 { 0.5 * (p.hi_exponent - 1.0) } else { p.hi_exponent };
                let hi_exp = p.lo_exponent;
                mapped.push(DensityPiece::new(ah * ah, al * al, lo_exp, hi_exp, move |q: Point| {
                    let t = q.x.sqrt();
                    if t == 0.0 {
                        return 0.0;
                    }
                    p.eval(Point { x: -t, from_lo: q.from_hi / (t + al), from_hi: q.from_lo / (t + ah) }) / (2.0 * t)
                }));
            }
        }
        let pieces = merge_overlapping(mapped);
        let exact = self.exact.clone().map(|e| Arc::new(move |k: usize| e(2 * k)) as ExactMoments);
        Self::assemble(atoms, pieces, Some(self.radius * self.radius), exact, format!("square[{}]", self.label))
    }

    /// Distribution of `λt` under `μ`.
    pub fn dilate(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return input("dilation factor must be positive");
        }
        let atoms = self.atoms.iter().map(|&(x, m)| (lambda * x, m)).collect();
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let inner = p.clone();
                DensityPiece::new(lambda * p.lo, lambda * p.hi, p.lo_exponent, p.hi_exponent, move |q: Point| {
                    inner.eval(Point { x: q.x / lambda, from_lo: q.from_lo / lambda, from_hi: q.from_hi / lambda }) / lambda
                })
            })
            .collect();
        let exact = self.exact.clone().map(|e| {
            let l = rat_from_f64(lambda);
            Arc::new(move |k: usize| e(k) * pow_rat(&l, k)) as ExactMoments
        });
        Self::assemble(atoms, pieces, Some(lambda * self.radius), exact, format!("dilate[{},{}]", self.label, fmt_num(lambda)))
    }

    /// Distribution function `μ((-∞, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        let quad = TanhSinh::with_tol(1e-14);
        let mut total: f64 = self.atoms.iter().filter(|a| a.0 <= x).map(|a| a.1).sum();
        for (p, &m) in self.pieces.iter().zip(&self.piece_mass) {
            if x >= p.hi {
                total += m;
            } else if x > p.lo {
                let part = p.restrict(p.lo, x);
                total += part.integrate(&quad, |_| 1.0).unwrap_or_else(|_| m * (x - p.lo) / (p.hi - p.lo));
            }
        }
        total
    }

    /// Many quantiles at once: a cumulative table on a grid of every piece,
    /// then a safeguarded secant solve inside the bracketing cell.
    pub fn quantiles(&self, qs: &[f64]) -> Vec<f64> {
        const CELLS: usize = 128;
        enum Item {
            Cell { piece: usize, a: f64, b: f64, mass: f64 },
            Atom { x: f64, mass: f64 },
        }
        let quad = TanhSinh::with_tol(1e-14);
        let mut items: Vec<(f64, u8, Item)> = Vec::new();
        for &(x, m) in &self.atoms {
            items.push((x, 0, Item::Atom { x, mass: m }));
        }
        for (pi, p) in self.pieces.iter().enumerate() {
            let mut cuts: Vec<f64> =
                (0..=CELLS).map(|k| if k == CELLS { p.hi } else { p.lo + (p.hi - p.lo) * k as f64 / CELLS as f64 }).collect();
            cuts.extend(self.atoms.iter().map(|a| a.0).filter(|&x| x > p.lo && x < p.hi));
            cuts.sort_by(|a, b| a.total_cmp(b));
            cuts.dedup();
            for w in cuts.windows(2) {
                let mass = p.restrict(w[0], w[1]).integrate(&quad, |_| 1.0).unwrap_or(0.0);
                items.push((w[0], 1, Item::Cell { piece: pi, a: w[0], b: w[1], mass }));
            }
        }
        items.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        let mut cum = Vec::with_capacity(items.len());
        let mut acc = 0.0;
        for it in &items {
            acc += match it.2 {
                Item::Cell { mass, .. } | Item::Atom { mass, .. } => mass,
            };
            cum.push(acc);
        }
        let (lo, hi) = self.support();
        qs.iter()
            .map(|&q| {
                if q <= 0.0 {
                    return lo;
                }
                if q >= 1.0 {
                    return hi;
                }
                let k = cum.partition_point(|&c| c < q).min(items.len() - 1);
                let before = if k == 0 { 0.0 } else { cum[k - 1] };
                match items[k].2 {
                    Item::Atom { x, .. } => x,
                    Item::Cell { piece, a, b, mass } => {
                        let target = (q - before).clamp(0.0, mass);
                        let p = &self.pieces[piece];
                        let g = |x: f64| {
                            if x <= a {
                                0.0
                            } else {
                                p.restrict(a, x).integrate(&quad, |_| 1.0).unwrap_or(0.0)
                            }
                        };
                        let (mut xa, mut xb, mut ga, mut gb) = (a, b, 0.0, mass);
                        for it in 0..100 {
                            if xb - xa <= 4.0 * f64::EPSILON * xa.abs().max(xb.abs()).max(1e-300) {
                                break;
                            }
                            let secant = xa + (target - ga) / (gb - ga) * (xb - xa);
                            let mid = 0.5 * (xa + xb);
                            let x = if it % 3 == 2 || !(secant > xa && secant < xb) { mid } else { secant };
                            let gx = g(x);
                            if gx == target {
                                return x;
                            }
                            if gx < target {
                                xa = x;
                                ga = gx;
                            } else {
                                xb = x;
                                gb = gx;
                            }
                            if (gb - ga).abs() <= 1e-16 {
                                break;
                            }
                        }
                        xb
                    }
                }
            })
            .collect()
    }

    /// Generalized inverse distribution function `inf{x : F(x) >= q}`.
    pub fn quantile(&self, q: f64) -> f64 {
        let (lo, hi) = self.support();
        if q <= 0.0 {
            return lo;
        }
        if q >= 1.0 {
            return hi;
        }
        let (mut a, mut b) = (lo, hi);
        if self.cdf(a) >= q {
            return a;
        }
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if self.cdf(mid) >= q {
                b = mid;
            } else {
                a = mid;
            }
        }
        // snap onto an atom sitting at the jump
        for &(x, _) in &self.atoms {
            if x >= a && x <= b {
                return x;
            }
        }
        b
    }
}

/// Combine pieces with overlapping intervals by summing densities on every
/// elementary sub-interval between breakpoints.
fn merge_overlapping(pieces: Vec<DensityPiece>) -> Vec<DensityPiece> {
    let mut cuts: Vec<f64> = pieces.iter().flat_map(|p| [p.lo, p.hi]).collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let cover: Vec<&DensityPiece> = pieces.iter().filter(|p| p.lo <= lo && p.hi >= hi).collect();
        match cover.len() {
            0 => {}
            1 if cover[0].lo == lo && cover[0].hi == hi => out.push(cover[0].clone()),
            _ => {
                let parts: Vec<DensityPiece> = cover.iter().map(|p| p.restrict(lo, hi)).collect();
                let lo_exp = parts.iter().map(|p| p.lo_exponent).fold(f64::INFINITY, f64::min);
                let hi_exp = parts.iter().map(|p| p.hi_exponent).fold(f64::INFINITY, f64::min);
                out.push(DensityPiece::new(lo, hi, lo_exp, hi_exp, move |q| parts.iter().map(|p| p.eval(q)).sum()));
            }
        }
    }
    out
}

/// `t·ρ(t²)` for a piece on `[sl², sh²]`, given the distances of `t` to
/// `sl` and `sh`. When the piece starts at 0 and `t²` would underflow, the
/// value is continued from `TINY` along `t^exp`.
fn root_density(piece: &DensityPiece, t: f64, from_lo: f64, from_hi: f64, sl: f64, sh: f64, exp: Option<f64>) -> f64 {
    const TINY: f64 = 1e-150;
    if let Some(exp) = exp {
        if t < TINY {
            let at = root_density(piece, TINY, TINY, sh - TINY, sl, sh, None);
            return at * (t / TINY).powf(exp);
        }
    }
    t * piece.eval(Point { x: t * t, from_lo: from_lo * (t + sl), from_hi: from_hi * (sh + t) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn point_mass_moments() {
        let d = CompactMeasure::point_mass(1.0);
        assert_eq!(d.moment(5).unwrap(), 1.0);
    }

    #[test]
    fn semicircle_catalan() {
        let s = CompactMeasure::semicircle(2.0).unwrap();
        for (k, c) in [(2, 1.0), (4, 2.0), (6, 5.0)] {
            assert!(close(s.moment(k).unwrap(), c, 1e-10));
            assert_eq!(s.exact_moment(k).unwrap(), BigRational::from_integer((c as i64).into()));
        }
        assert!(close(s.moment(3).unwrap(), 0.0, 1e-12));
    }

    #[test]
    fn quartercircle_second_moment() {
        let q = CompactMeasure::quartercircle(4.0).unwrap();
        assert!(close(q.moment(2).unwrap(), 2.0, 1e-10));
        assert!(close(q.moment(3).unwrap(), 5.0, 1e-10));
    }

    #[test]
    fn sqrt_of_quartercircle_is_semicircle() {
        let mu = CompactMeasure::quartercircle(4.0).unwrap().symmetric_square_root().unwrap();
        let s = CompactMeasure::semicircle(2.0).unwrap();
        for x in [-1.9, -1.0, -1e-9, 0.3, 1.5, 1.999] {
            assert!(close(mu.density(x), s.density(x), 1e-12), "x={x}");
        }
        assert!(close(mu.moment(4).unwrap(), 2.0, 1e-10));
    }

    #[test]
    fn sqrt_of_uniform_is_abs() {
        let mu = CompactMeasure::uniform(0.0, 1.0).unwrap().symmetric_square_root().unwrap();
        for x in [-0.9, -0.2, 0.4, 0.99] {
            assert!(close(mu.density(x), f64::abs(x), 1e-14));
        }
    }

    #[test]
    fn sqrt_of_atoms() {
        let mu = CompactMeasure::point_mass(1.0).symmetric_square_root().unwrap();
        assert_eq!(mu.atoms(), &[(-1.0, 0.5), (1.0, 0.5)]);
        assert!(CompactMeasure::uniform(-1.0, 1.0).unwrap().symmetric_square_root().is_err());
    }

    #[test]
    fn push_square_examples() {
        let two = CompactMeasure::discrete(vec![(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        assert_eq!(two.push_square().unwrap().atoms(), &[(1.0, 1.0)]);
        let q = CompactMeasure::semicircle(2.0).unwrap().push_square().unwrap();
        let qc = CompactMeasure::quartercircle(4.0).unwrap();
        for x in [1e-6, 0.5, 2.0, 3.9] {
            assert!(close(q.density(x), qc.density(x), 1e-9 * qc.density(x).max(1.0)), "x={x}");
        }
        let abs = CompactMeasure::uniform(0.0, 1.0).unwrap().symmetric_square_root().unwrap().push_square().unwrap();
        assert!(close(abs.density(0.37), 1.0, 1e-12));
    }

    #[test]
    fn dilate_examples() {
        let d = CompactMeasure::point_mass(1.0).dilate(3.0).unwrap();
        assert_eq!(d.atoms(), &[(3.0, 1.0)]);
        let s = CompactMeasure::semicircle(2.0).unwrap();
        assert!(close(s.dilate(2.0).unwrap().moment(4).unwrap(), 32.0, 1e-9));
        let half = s.dilate(0.5).unwrap();
        let one = CompactMeasure::semicircle(1.0).unwrap();
        assert!(close(half.density(0.4), one.density(0.4), 1e-13));
        assert!(s.dilate(0.0).is_err());
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(CompactMeasure::point_mass(1.0).quantile(0.5), 1.0);
        assert!(close(CompactMeasure::uniform(0.0, 1.0).unwrap().quantile(0.25), 0.25, 1e-12));
        assert!(close(CompactMeasure::semicircle(2.0).unwrap().quantile(0.5), 0.0, 1e-12));
    }

    #[test]
    fn beta_exact_matches_quadrature() {
        let b = CompactMeasure::beta(2.5, 1.5, -1.0, 2.0).unwrap();
        for k in 0..6 {
            let e = b.exact_moment(k).unwrap().to_f64().unwrap();
            assert!(close(e, b.moment(k).unwrap(), 1e-10), "k={k}");
        }
    }

    #[test]
    fn table_is_normalized() {
        let pts: Vec<(f64, f64)> = (0..=20).map(|i| {
            let t = -1.0 + 0.1 * i as f64;
            (t, 1.0 - t * t)
        }).collect();
        let m = CompactMeasure::table(&pts).unwrap();
        assert!(close(m.total_mass(), 1.0, 1e-12));
        assert!(close(m.moment(1).unwrap(), 0.0, 1e-12));
    }

    #[test]
    fn hankel_psd() {
        let s = CompactMeasure::semicircle(2.0).unwrap();
        assert!(s.moments(10).unwrap().is_hankel_psd(1e-9));
        let bad = MomentSequence { moments: vec![1.0, 0.0, -1.0] };
        assert!(!bad.is_hankel_psd(1e-9));
    }

    #[test]
    fn named_measures() {
        assert!(CompactMeasure::from_name("quartercircle(4)").unwrap().is_exact());
        assert!(CompactMeasure::from_name("uniform(0, 1)").is_ok());
        assert!(CompactMeasure::from_name("gauss(1)").is_err());
    }

    #[test]
    fn rejects_bad_mass() {
        let p = uniform_piece(0.0, 1.0).scaled(0.5);
        assert!(CompactMeasure::new(vec![], vec![p], None, "half").is_err());
    }
}

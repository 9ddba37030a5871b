use faer::{Mat, Side};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{rng, EnsembleSample, SpectralSample};
use crate::error::{input, Error, Result};
use crate::measures::CompactMeasure;

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        return input("matrix dimension must be at least 1");
    }
    if n > 8192 {
        return Err(Error::Resource(format!("dimension {n} exceeds 8192")));
    }
    Ok(())
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the
/// phases of `diag(R)` moved into `Q`.
pub fn haar_unitary(n: usize, seed: u64) -> Result<EnsembleSample> {
    check_dim(n)?;
    let mut r = rng(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut z = Mat::<Complex64>::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            let re: f64 = r.sample(StandardNormal);
            let im: f64 = r.sample(StandardNormal);
            z[(i, j)] = Complex64::new(re * scale, im * scale);
        }
    }
    let qr = z.qr();
    let mut q = qr.compute_Q();
    let rr = qr.R();
    for j in 0..n {
        let d = rr[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    Ok(EnsembleSample { n, seed, tag: "haar".into(), matrix: q })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagMode {
    Iid,
    /// Quantiles at `(k − 1/2)/N`.
    Stratified,
}

/// Diagonal entries drawn from `mu` by inverse transform.
pub fn diag_values(n: usize, mu: &CompactMeasure, seed: u64, mode: DiagMode) -> Vec<f64> {
    match mode {
        DiagMode::Stratified => mu.quantiles(&(0..n).map(|k| (k as f64 + 0.5) / n as f64).collect::<Vec<_>>()),
        DiagMode::Iid => {
            let mut r = rng(seed);
            let u: Vec<f64> = (0..n).map(|_| r.random::<f64>()).collect();
            mu.quantiles(&u)
        }
    }
}

pub fn diag_from_measure(n: usize, mu: &CompactMeasure, seed: u64, mode: DiagMode) -> Result<EnsembleSample> {
    check_dim(n)?;
    let vals = diag_values(n, mu, seed, mode);
    let mut m = Mat::<Complex64>::zeros(n, n);
    for (i, v) in vals.into_iter().enumerate() {
        m[(i, i)] = Complex64::new(v, 0.0);
    }
    let tag = match mode {
        DiagMode::Iid => "diag-iid",
        DiagMode::Stratified => "diag-stratified",
    };
    Ok(EnsembleSample { n, seed, tag: tag.into(), matrix: m })
}

fn scale_columns(m: &mut Mat<Complex64>, d: &[Complex64]) {
    for (j, &dj) in d.iter().enumerate() {
        for i in 0..m.nrows() {
            m[(i, j)] *= dj;
        }
    }
}

/// `A = U·P` with `U` Haar and `P` diagonal, stratified from the symmetric
/// square root of `nu`. Returns `A` and the diagonal of `P`.
pub fn rdiagonal_matrix(n: usize, nu: &CompactMeasure, seed: u64) -> Result<(EnsembleSample, Vec<f64>)> {
    check_dim(n)?;
    let mu = nu.symmetric_square_root()?;
    let p = diag_values(n, &mu, seed, DiagMode::Stratified);
    let mut a = haar_unitary(n, seed)?.matrix;
    scale_columns(&mut a, &p.iter().map(|&v| Complex64::new(v, 0.0)).collect::<Vec<_>>());
    Ok((EnsembleSample { n, seed, tag: "rdiagonal".into(), matrix: a }, p))
}

/// `A = P·Θ` with the same `P` as [`rdiagonal_matrix`] and `Θ` a diagonal of
/// independent uniform phases: same `A*A`, no Haar factor.
pub fn phase_model(n: usize, nu: &CompactMeasure, seed: u64) -> Result<EnsembleSample> {
    check_dim(n)?;
    let mu = nu.symmetric_square_root()?;
    let p = diag_values(n, &mu, seed, DiagMode::Stratified);
    let mut r = rng(seed ^ 0x5eed_0f_7ae5);
    let mut m = Mat::<Complex64>::zeros(n, n);
    for (i, v) in p.into_iter().enumerate() {
        let theta = r.random::<f64>() * std::f64::consts::TAU;
        m[(i, i)] = Complex64::from_polar(v, theta);
    }
    Ok(EnsembleSample { n, seed, tag: "phase".into(), matrix: m })
}

/// `[[0, M], [M*, 0]]`.
pub fn block_embed_matrix(m: &Mat<Complex64>) -> Mat<Complex64> {
    let (r, c) = (m.nrows(), m.ncols());
    Mat::from_fn(r + c, r + c, |i, j| {
        if i < r && j >= r {
            m[(i, j - r)]
        } else if i >= r && j < r {
            m[(j, i - r)].conj()
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

pub fn hermitian_spectrum(m: &Mat<Complex64>, kind: &str) -> Result<SpectralSample> {
    let ev = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Consistency(format!("eigenvalue solver failed: {e:?}")))?;
    Ok(SpectralSample::new(ev, kind))
}

/// Spectrum of [`block_embed_matrix`]`(m)` for square `m`: the singular
/// values and their negatives.
pub fn embedded_spectrum(m: &Mat<Complex64>) -> Result<SpectralSample> {
    Ok(plus_minus(&singular_values(m)?))
}

/// Singular values by SVD.
pub fn singular_values(m: &Mat<Complex64>) -> Result<SpectralSample> {
    let sv = m.singular_values().map_err(|e| Error::Consistency(format!("SVD failed: {e:?}")))?;
    Ok(SpectralSample::new(sv, "singular"))
}

/// Singular values as square roots of the eigenvalues of `M*M`. About twice
/// as fast as the SVD; values near 0 lose half their digits.
pub(crate) fn gram_singular_values(m: &Mat<Complex64>) -> Result<SpectralSample> {
    let g = m.adjoint() * m;
    let ev = hermitian_spectrum(&g, "gram")?;
    Ok(SpectralSample::new(ev.values.into_iter().map(|v| v.max(0.0).sqrt()).collect(), "singular"))
}

pub(crate) fn plus_minus(sv: &SpectralSample) -> SpectralSample {
    let mut v: Vec<f64> = sv.values.iter().map(|x| -x).collect();
    v.extend_from_slice(&sv.values);
    SpectralSample::new(v, "block-embedding")
}

/// Blocks `b_ij` (each `N×N`) of `X₀ = V D V*` in `M_d(M_N)`, with `V` Haar
/// of size `Nd` and `D` stratified from `mu`. With matrix units realised as
/// block shifts, `v_1i X₀ v_j1` is the `(i, j)` block of `X₀`.
pub fn compressed_entries(mu: &CompactMeasure, d: usize, n: usize, seed: u64) -> Result<Vec<Vec<Mat<Complex64>>>> {
    if d == 0 {
        return input("d must be at least 1");
    }
    let nd = n.checked_mul(d).ok_or_else(|| Error::Resource("dimension overflow".into()))?;
    check_dim(nd)?;
    let dvals = diag_values(nd, mu, seed, DiagMode::Stratified);
    let x0 = if d == 1 {
        Mat::from_fn(n, n, |i, j| if i == j { Complex64::new(dvals[i], 0.0) } else { Complex64::new(0.0, 0.0) })
    } else {
        let v = haar_unitary(nd, seed)?.matrix;
        let mut vd = v.clone();
        scale_columns(&mut vd, &dvals.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>());
        &vd * v.adjoint()
    };
    Ok((0..d)
        .map(|bi| (0..d).map(|bj| Mat::from_fn(n, n, |i, j| x0[(bi * n + i, bj * n + j)])).collect())
        .collect())
}

pub fn reassemble_blocks(blocks: &[Vec<Mat<Complex64>>]) -> Mat<Complex64> {
    let d = blocks.len();
    let n = blocks[0][0].nrows();
    Mat::from_fn(n * d, n * d, |i, j| blocks[i / n][j / n][(i % n, j % n)])
}

/// Largest `|tr(B°·E°_ii·B°·E°_jj)|` and `|tr(B°·E°_ii)|` over `i, j`, where
/// `°` centres with respect to the normalized trace and `E_ii` are the
/// diagonal matrix units of `M_d`.
pub fn compression_freeness_residual(blocks: &[Vec<Mat<Complex64>>]) -> f64 {
    let d = blocks.len();
    let n = blocks[0][0].nrows();
    let b = reassemble_blocks(blocks);
    let nd = n * d;
    let mean = (0..nd).map(|i| b[(i, i)]).sum::<Complex64>() / nd as f64;
    let mut bc = b;
    for i in 0..nd {
        bc[(i, i)] -= mean;
    }
    let weight = |k: usize, block: usize| if block == k { 1.0 - 1.0 / d as f64 } else { -1.0 / d as f64 };
    let mut worst: f64 = 0.0;
    for k in 0..d {
        let t1: Complex64 = (0..nd).map(|i| bc[(i, i)] * weight(k, i / n)).sum::<Complex64>() / nd as f64;
        worst = worst.max(t1.norm());
        for l in 0..d {
            // tr(B° D_k B° D_l) = Σ_ij B°_ij w_l(j) B°_ji w_k(i)
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..nd {
                let wl = weight(l, j / n);
                for i in 0..nd {
                    acc += bc[(i, j)] * bc[(j, i)] * (wl * weight(k, i / n));
                }
            }
            worst = worst.max(acc.norm() / nd as f64);
        }
    }
    worst
}

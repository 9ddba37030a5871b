use rand::Rng;
use serde::Serialize;

use super::{rng, SpectralSample};
use crate::error::{input, Result};
use crate::functionals::FisherConstant;
use crate::measures::CompactMeasure;

pub const MIN_KDE_POINTS: usize = 200;
const KERNEL_REACH: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bandwidth {
    Silverman,
    Fixed(f64),
}

#[derive(Clone, Copy, Debug)]
pub struct KdeOptions {
    pub bandwidth: Bandwidth,
    /// Reflect the estimate at these endpoints.
    pub support: Option<(f64, f64)>,
    pub grid: usize,
    pub bootstrap: usize,
    pub seed: u64,
    pub kappa: FisherConstant,
}

impl Default for KdeOptions {
    fn default() -> Self {
        KdeOptions {
            bandwidth: Bandwidth::Silverman,
            support: None,
            grid: 2048,
            bootstrap: 40,
            seed: 0,
            kappa: FisherConstant::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FisherEstimate {
    pub value: f64,
    pub std_error: f64,
    pub bandwidth: f64,
    pub points: usize,
    /// Set when the sample has no spread and the estimate is `+∞`.
    pub degenerate: bool,
}

fn silverman(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let q = |p: f64| {
        let x = p * (sorted.len() - 1) as f64;
        let i = x.floor() as usize;
        let f = x - i as f64;
        sorted[i] * (1.0 - f) + sorted[(i + 1).min(sorted.len() - 1)] * f
    };
    let iqr = q(0.75) - q(0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    0.9 * spread * n.powf(-0.2)
}

/// `∫ ρ̂³` for the Gaussian KDE with bandwidth `h`, linearly binned.
fn kde_cube_integral(values: &[f64], h: f64, support: Option<(f64, f64)>, grid: usize) -> f64 {
    let (vmin, vmax) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let (lo, hi, reflect) = match support {
        Some((lo, hi)) => (lo.min(vmin), hi.max(vmax), true),
        None => (vmin - KERNEL_REACH * h, vmax + KERNEL_REACH * h, false),
    };
    let needed = ((hi - lo) / h * 8.0).ceil() as usize + 1;
    let g = grid.max(needed).clamp(64, 1 << 16);
    let dx = (hi - lo) / (g - 1) as f64;
    let mut counts = vec![0.0; g];
    for &v in values {
        let pos = ((v - lo) / dx).clamp(0.0, (g - 1) as f64);
        let i = (pos.floor() as usize).min(g - 2);
        let f = pos - i as f64;
        counts[i] += 1.0 - f;
        counts[i + 1] += f;
    }
    let reach = ((KERNEL_REACH * h / dx).ceil() as usize).min(2 * g);
    let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * h * values.len() as f64);
    let kernel: Vec<f64> = (0..=reach).map(|k| norm * (-0.5 * (k as f64 * dx / h).powi(2)).exp()).collect();
    let kern = |off: i64| -> f64 {
        let k = off.unsigned_abs() as usize;
        if k <= reach {
            kernel[k]
        } else {
            0.0
        }
    };
    let last = (g - 1) as i64;
    let mut total = 0.0;
    for gi in 0..g {
        let a = gi.saturating_sub(reach);
        let b = (gi + reach).min(g - 1);
        let mut rho = 0.0;
        for (gj, &c) in counts.iter().enumerate().take(b + 1).skip(a) {
            if c != 0.0 {
                rho += c * kern(gi as i64 - gj as i64);
            }
        }
        if reflect {
            let gi = gi as i64;
            let r = reach as i64;
            for gj in 0..=(r - gi).min(last) {
                rho += counts[gj as usize] * kern(gi + gj);
            }
            for gj in (2 * last - r - gi).max(0)..=last {
                rho += counts[gj as usize] * kern(2 * last - gi - gj);
            }
        }
        let w = if gi == 0 || gi == g - 1 { 0.5 } else { 1.0 };
        total += w * rho * rho * rho;
    }
    total * dx
}

/// `κ ∫ ρ̂³` for a Gaussian kernel density estimate of the sample, with a
/// bootstrap standard error.
pub fn empirical_fisher(sample: &SpectralSample, opts: &KdeOptions) -> Result<FisherEstimate> {
    let values = &sample.values;
    if values.len() < MIN_KDE_POINTS {
        return input(format!("kernel estimate needs at least {MIN_KDE_POINTS} points, got {}", values.len()));
    }
    let h = match opts.bandwidth {
        Bandwidth::Silverman => silverman(values),
        Bandwidth::Fixed(h) if h > 0.0 => h,
        Bandwidth::Fixed(h) => return input(format!("bandwidth must be positive, got {h}")),
    };
    if !(h > 0.0) || !h.is_finite() {
        return Ok(FisherEstimate { value: f64::INFINITY, std_error: 0.0, bandwidth: 0.0, points: values.len(), degenerate: true });
    }
    let kappa = opts.kappa.kappa;
    let value = kappa * kde_cube_integral(values, h, opts.support, opts.grid);
    let mut r = rng(opts.seed);
    let mut boot = Vec::with_capacity(opts.bootstrap);
    let mut resample = vec![0.0; values.len()];
    for _ in 0..opts.bootstrap {
        for slot in resample.iter_mut() {
            *slot = values[r.random_range(0..values.len())];
        }
        boot.push(kappa * kde_cube_integral(&resample, h, opts.support, opts.grid));
    }
    let std_error = if boot.len() > 1 {
        let m = boot.iter().sum::<f64>() / boot.len() as f64;
        (boot.iter().map(|b| (b - m).powi(2)).sum::<f64>() / (boot.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(FisherEstimate { value, std_error, bandwidth: h, points: values.len(), degenerate: false })
}

#[derive(Clone, Debug, Serialize)]
pub struct LogEnergyEstimate {
    pub value: f64,
    pub points: usize,
    pub ties_jittered: usize,
    pub note: &'static str,
}

/// `(1/N²) Σ_{i≠j} log|λ_i − λ_j|`. Repeated values are separated by a
/// relative `1e-12` shift before summing.
pub fn empirical_log_energy(sample: &SpectralSample) -> LogEnergyEstimate {
    let mut v = sample.values.clone();
    v.sort_by(|a, b| a.total_cmp(b));
    let mut ties = 0;
    for k in 1..v.len() {
        if v[k] <= v[k - 1] {
            v[k] = v[k - 1] + 1e-12 * v[k - 1].abs().max(1.0);
            ties += 1;
        }
    }
    let n = v.len();
    let mut total = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in i + 1..n {
            row += (v[j] - v[i]).ln();
        }
        total += row;
    }
    let value = if n == 0 { 0.0 } else { 2.0 * total / (n * n) as f64 };
    LogEnergyEstimate { value, points: n, ties_jittered: ties, note: "diagonal terms omitted; bias O(log N / N)" }
}

/// `sup |F_N − F|` between the empirical distribution and `mu`.
pub fn kolmogorov_distance(sample: &SpectralSample, mu: &CompactMeasure) -> f64 {
    let n = sample.values.len() as f64;
    let mut worst: f64 = 0.0;
    let mut i = 0;
    let v = &sample.values;
    while i < v.len() {
        let mut j = i;
        while j + 1 < v.len() && v[j + 1] == v[i] {
            j += 1;
        }
        let f = mu.cdf(v[i]);
        worst = worst.max((f - i as f64 / n).abs()).max(((j + 1) as f64 / n - f).abs());
        i = j + 1;
    }
    worst
}

use std::collections::HashMap;

use faer::Mat;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::ensembles::{gram_singular_values, plus_minus};
use super::{
    empirical_fisher, empirical_log_energy, kolmogorov_distance, phase_model, rdiagonal_matrix, rng,
    trial_seed, FisherEstimate, KdeOptions, LogEnergyEstimate, SpectralSample,
};
use crate::engine::{DynFunctional, Letter, Symbol, Word};
use crate::error::{input, Result};
use crate::measures::CompactMeasure;

/// Master seed and number of trials; trial `i` uses `trial_seed(master, i)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TrialSeeds {
    pub master: u64,
    pub count: usize,
}

impl TrialSeeds {
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.count as u64).map(|i| trial_seed(self.master, i)).collect()
    }
}

/// All words of length `1..=max_len` in `a, a*`.
pub fn star_words(gen: &str, max_len: usize) -> Vec<Word> {
    let s = Symbol::new(gen);
    let mut out = Vec::new();
    for len in 1..=max_len {
        for bits in 0..(1u32 << len) {
            out.push(Word::from_letters((0..len).map(|i| Letter::new(s, bits >> (len - 1 - i) & 1 == 1))));
        }
    }
    out
}

struct Products<'a> {
    a: &'a Mat<Complex64>,
    cache: HashMap<Vec<bool>, Mat<Complex64>>,
}

impl<'a> Products<'a> {
    fn get(&mut self, w: &[bool]) -> &Mat<Complex64> {
        if !self.cache.contains_key(w) {
            let adj: Vec<bool> = w.iter().rev().map(|s| !s).collect();
            let m = if w.len() == 1 {
                if w[0] {
                    self.a.adjoint().to_owned()
                } else {
                    self.a.clone()
                }
            } else if adj.as_slice() != w && self.cache.contains_key(&adj) {
                self.cache[&adj].adjoint().to_owned()
            } else {
                let head = self.get(&w[..w.len() - 1]).clone();
                let last = self.get(&w[w.len() - 1..]);
                &head * last
            };
            self.cache.insert(w.to_vec(), m);
        }
        &self.cache[w]
    }
}

fn trace_product(x: &Mat<Complex64>, y: &Mat<Complex64>) -> Complex64 {
    let yt = y.transpose().to_owned();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..x.ncols() {
        acc += x.col_as_slice(j).iter().zip(yt.col_as_slice(j)).map(|(a, b)| a * b).sum::<Complex64>();
    }
    acc
}

fn least_rotation(w: &[bool]) -> Vec<bool> {
    (0..w.len()).map(|r| [&w[r..], &w[..r]].concat()).min().unwrap_or_default()
}

/// Normalized traces of every word of length `1..=max_len` in `A, A*`.
/// Words in the same rotation class, or adjoint classes, share one
/// computation.
pub fn trace_star_words(a: &Mat<Complex64>, max_len: usize) -> Vec<(Vec<bool>, Complex64)> {
    let n = a.nrows() as f64;
    let mut prods = Products { a, cache: HashMap::new() };
    let mut known: HashMap<Vec<bool>, Complex64> = HashMap::new();
    let mut out = Vec::new();
    for len in 1..=max_len {
        for bits in 0..(1u32 << len) {
            let w: Vec<bool> = (0..len).map(|i| bits >> (len - 1 - i) & 1 == 1).collect();
            let class = least_rotation(&w);
            let adj_class = least_rotation(&w.iter().rev().map(|s| !s).collect::<Vec<_>>());
            let t = if let Some(&t) = known.get(&class) {
                t
            } else if let Some(&t) = known.get(&adj_class) {
                t.conj()
            } else {
                let t = if len == 1 {
                    let m = prods.get(&class);
                    (0..m.nrows()).map(|i| m[(i, i)]).sum::<Complex64>()
                } else {
                    let split = len.div_ceil(2);
                    let x = prods.get(&class[..split]).clone();
                    let y = prods.get(&class[split..]);
                    trace_product(&x, y)
                } / n;
                known.insert(class, t);
                t
            };
            out.push((w, t));
        }
    }
    out
}

/// Bootstrap standard error of the mean.
pub fn bootstrap_mean_se(values: &[f64], resamples: usize, seed: u64) -> f64 {
    let n = values.len();
    if n < 2 || resamples < 2 {
        return 0.0;
    }
    let mut r = rng(seed);
    let means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| values[r.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    let m = means.iter().sum::<f64>() / resamples as f64;
    (means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (resamples - 1) as f64).sqrt()
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentComparison {
    pub word: String,
    pub mean_re: f64,
    pub mean_im: f64,
    pub std_error: f64,
    pub symbolic_re: f64,
    pub symbolic_im: f64,
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Mean over trials of the normalized *-moments of `A = U·P` against the
/// symbolic R-diagonal functional. Tolerance is `3·SE + floor`.
pub fn monte_carlo_star_moments(
    nu: &CompactMeasure,
    n: usize,
    seeds: TrialSeeds,
    max_len: usize,
    floor: f64,
) -> Result<Vec<MomentComparison>> {
    if seeds.count == 0 {
        return input("need at least one trial");
    }
    check_len(max_len)?;
    let per_trial: Vec<Vec<(Vec<bool>, Complex64)>> = seeds
        .seeds()
        .into_par_iter()
        .map(|s| rdiagonal_matrix(n, nu, s).map(|(a, _)| trace_star_words(&a.matrix, max_len)))
        .collect::<Result<_>>()?;
    compare_star_moments(nu, &per_trial, max_len, seeds.master, floor)
}

fn check_len(max_len: usize) -> Result<()> {
    if max_len == 0 || max_len > 10 {
        return input("word length must be between 1 and 10");
    }
    Ok(())
}

/// Compares per-trial traces (as returned by [`trace_star_words`]) with the
/// symbolic values.
pub fn compare_star_moments(
    nu: &CompactMeasure,
    per_trial: &[Vec<(Vec<bool>, Complex64)>],
    max_len: usize,
    master: u64,
    floor: f64,
) -> Result<Vec<MomentComparison>> {
    if per_trial.is_empty() {
        return input("need at least one trial");
    }
    check_len(max_len)?;
    let f = DynFunctional::rdiagonal(nu, false)?;
    let words = star_words("a", max_len);
    if per_trial.iter().any(|t| t.len() != words.len()) {
        return input("trial traces do not match the word list");
    }
    let count = per_trial.len() as f64;
    let mut out = Vec::with_capacity(words.len());
    for (k, word) in words.iter().enumerate() {
        let re: Vec<f64> = per_trial.iter().map(|t| t[k].1.re).collect();
        let im: Vec<f64> = per_trial.iter().map(|t| t[k].1.im).collect();
        let mean = Complex64::new(re.iter().sum::<f64>(), im.iter().sum::<f64>()) / count;
        let se_re = bootstrap_mean_se(&re, 200, master ^ k as u64);
        let se_im = bootstrap_mean_se(&im, 200, master ^ (k as u64) << 32);
        let std_error = se_re.hypot(se_im);
        let symbolic = f.evaluate(word)?;
        let deviation = (mean - symbolic).norm();
        let tolerance = 3.0 * std_error + floor;
        out.push(MomentComparison {
            word: word.to_string(),
            mean_re: mean.re,
            mean_im: mean.im,
            std_error,
            symbolic_re: symbolic.re,
            symbolic_im: symbolic.im,
            deviation,
            tolerance,
            pass: deviation <= tolerance,
        });
    }
    Ok(out)
}

/// Everything measured on one draw of `A = U·P`.
#[derive(Clone, Debug, Serialize)]
pub struct RDiagonalTrial {
    pub seed: u64,
    /// Kolmogorov distance of the block-embedding ESD to `symmetric_square_root(nu)`.
    pub ks: f64,
    pub fisher: FisherEstimate,
    pub log_energy: LogEnergyEstimate,
    #[serde(skip)]
    pub traces: Vec<(Vec<bool>, Complex64)>,
}

/// One trial of the equality-case experiment. The block-embedding spectrum
/// is read off as `±` the singular values of `A`, taken from `A*A`.
pub fn rdiagonal_trial(
    nu: &CompactMeasure,
    n: usize,
    seed: u64,
    max_len: usize,
    kde: &KdeOptions,
) -> Result<RDiagonalTrial> {
    check_len(max_len)?;
    let mu = nu.symmetric_square_root()?;
    let (a, _) = rdiagonal_matrix(n, nu, seed)?;
    let esd = plus_minus(&gram_singular_values(&a.matrix)?);
    let fisher = empirical_fisher(&esd, &KdeOptions { seed: kde.seed ^ seed, ..*kde })?;
    Ok(RDiagonalTrial {
        seed,
        ks: kolmogorov_distance(&esd, &mu),
        fisher,
        log_energy: empirical_log_energy(&esd),
        traces: trace_star_words(&a.matrix, max_len),
    })
}

/// `(Φ̂(Re A) + Φ̂(Im A)) / 2` for the phase model `A = P·Θ`. By
/// superadditivity this is a lower bound for `Φ*(A, A*)` of the model.
pub fn phase_model_fisher(nu: &CompactMeasure, n: usize, seed: u64, kde: &KdeOptions) -> Result<f64> {
    let a = phase_model(n, nu, seed)?;
    let diag: Vec<Complex64> = (0..n).map(|i| a.matrix[(i, i)]).collect();
    let opts = KdeOptions { seed: kde.seed ^ seed, ..*kde };
    let re = empirical_fisher(&SpectralSample::new(diag.iter().map(|z| z.re).collect(), "re"), &opts)?;
    let im = empirical_fisher(&SpectralSample::new(diag.iter().map(|z| z.im).collect(), "im"), &opts)?;
    Ok((re.value + im.value) / 2.0)
}

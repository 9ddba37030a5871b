//! Finite-N random matrix models: Haar unitaries, `U·P` models, block
//! embeddings, compressions and empirical spectral functionals.

mod empirical;
mod ensembles;
mod experiments;

pub use empirical::{
    empirical_fisher, empirical_log_energy, kolmogorov_distance, Bandwidth, FisherEstimate, KdeOptions, LogEnergyEstimate,
};
pub use ensembles::{
    block_embed_matrix, compressed_entries, embedded_spectrum, compression_freeness_residual, diag_from_measure, diag_values, haar_unitary,
    hermitian_spectrum, phase_model, rdiagonal_matrix, reassemble_blocks, singular_values, DiagMode,
};
pub use experiments::{
    bootstrap_mean_se, compare_star_moments, monte_carlo_star_moments, phase_model_fisher, rdiagonal_trial, star_words,
    trace_star_words, MomentComparison, RDiagonalTrial, TrialSeeds,
};

use faer::Mat;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// A sampled `N×N` complex matrix together with what produced it.
#[derive(Clone, Debug)]
pub struct EnsembleSample {
    pub n: usize,
    pub seed: u64,
    pub tag: String,
    pub matrix: Mat<Complex64>,
}

impl EnsembleSample {
    /// `max |M*M − I|` entrywise.
    pub fn unitarity_defect(&self) -> f64 {
        let m = &self.matrix;
        let g = m.adjoint() * m;
        let mut worst: f64 = 0.0;
        for j in 0..g.ncols() {
            for i in 0..g.nrows() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    /// Normalized trace `(1/N) Tr M`.
    pub fn normalized_trace(&self) -> Complex64 {
        let n = self.matrix.nrows();
        (0..n).map(|i| self.matrix[(i, i)]).sum::<Complex64>() / n as f64
    }
}

/// Sorted real spectrum (eigenvalues or singular values).
#[derive(Clone, Debug, Serialize)]
pub struct SpectralSample {
    pub values: Vec<f64>,
    pub kind: String,
}

impl SpectralSample {
    pub fn new(mut values: Vec<f64>, kind: impl Into<String>) -> Self {
        values.sort_by(|a, b| a.total_cmp(b));
        SpectralSample { values, kind: kind.into() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn moment(&self, k: i32) -> f64 {
        self.values.iter().map(|v| v.powi(k)).sum::<f64>() / self.values.len() as f64
    }

    pub fn dilate(&self, lambda: f64) -> Self {
        SpectralSample::new(self.values.iter().map(|v| v * lambda).collect(), self.kind.clone())
    }

    /// One value per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 24);
        for v in &self.values {
            out.push_str(&format!("{v:.17e}\n"));
        }
        out
    }
}

/// Seed of trial `index` under `master`; distinct trials get independent
/// streams.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

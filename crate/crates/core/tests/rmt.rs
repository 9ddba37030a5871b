use faer::Mat;
use num_complex::Complex64;

use freefisher::functionals::{fisher_of_measure, FisherConstant};
use freefisher::rmt::{
    block_embed_matrix, compressed_entries, compression_freeness_residual, diag_values, embedded_spectrum,
    empirical_fisher, empirical_log_energy, haar_unitary, hermitian_spectrum, kolmogorov_distance,
    monte_carlo_star_moments, phase_model, rdiagonal_matrix, reassemble_blocks, singular_values, star_words,
    trace_star_words, trial_seed, DiagMode, KdeOptions, SpectralSample, TrialSeeds,
};
use freefisher::{CompactMeasure, Error};

fn m(name: &str) -> CompactMeasure {
    CompactMeasure::from_name(name).unwrap()
}

fn ntrace(a: &Mat<Complex64>) -> Complex64 {
    (0..a.nrows()).map(|i| a[(i, i)]).sum::<Complex64>() / a.nrows() as f64
}

fn stratified(mu: &CompactMeasure, n: usize) -> SpectralSample {
    SpectralSample::new(diag_values(n, mu, 0, DiagMode::Stratified), "stratified")
}

#[test]
fn haar_is_unitary_and_deterministic() {
    let u = haar_unitary(64, 5).unwrap();
    assert!(u.unitarity_defect() < 1e-12);
    let again = haar_unitary(64, 5).unwrap();
    assert!(u.matrix == again.matrix);
    assert!(haar_unitary(64, 6).unwrap().matrix != u.matrix);
    assert!(matches!(haar_unitary(0, 1), Err(Error::Input(_))));
    assert!(matches!(haar_unitary(8193, 1), Err(Error::Resource(_))));
}

#[test]
fn haar_moments() {
    // E|tr U|² = 1/N² for Haar U, tr U averages to 0
    let n = 48;
    let trials = 200;
    let (mut mean, mut second) = (Complex64::new(0.0, 0.0), 0.0);
    for s in 0..trials {
        let t = haar_unitary(n, trial_seed(3, s)).unwrap().normalized_trace();
        mean += t;
        second += t.norm_sqr();
    }
    mean /= trials as f64;
    second /= trials as f64;
    assert!(mean.norm() < 0.01, "{mean}");
    let expect = 1.0 / (n * n) as f64;
    assert!((second / expect - 1.0).abs() < 0.3, "{second} vs {expect}");
}

#[test]
fn rdiagonal_point_mass_is_unitary() {
    let (a, p) = rdiagonal_matrix(32, &m("pointmass(1)"), 1).unwrap();
    assert!(p.iter().all(|v| v.abs() == 1.0));
    assert!(a.unitarity_defect() < 1e-12);
}

#[test]
fn rdiagonal_quartercircle_moments() {
    let (a, _) = rdiagonal_matrix(512, &m("quartercircle(4)"), 9).unwrap();
    let a = a.matrix;
    let g = a.adjoint() * &a;
    let g2 = &g * &g;
    assert!((ntrace(&g2).re - 2.0).abs() < 0.05);
    assert!(ntrace(&(&a * &a)).norm() < 0.05);
}

#[test]
fn rdiagonal_requires_nonnegative_support() {
    assert!(rdiagonal_matrix(16, &m("semicircle(2)"), 0).is_err());
}

#[test]
fn block_embedding_spectrum_is_plus_minus_singular_values() {
    for seed in 0..5 {
        let a = haar_unitary(12, seed).unwrap().matrix;
        let d = Mat::from_fn(12, 12, |i, j| if i == j { Complex64::new(i as f64 - 4.0, 0.0) } else { Complex64::new(0.0, 0.0) });
        let x = &a * &d;
        let eig = hermitian_spectrum(&block_embed_matrix(&x), "embed").unwrap();
        let sv = embedded_spectrum(&x).unwrap();
        for (p, q) in eig.values.iter().zip(&sv.values) {
            assert!((p - q).abs() < 1e-10);
        }
    }
    let id = Mat::<Complex64>::identity(3, 3);
    let e = block_embed_matrix(&id);
    assert_eq!(e.nrows(), 6);
    assert!(e == e.adjoint().to_owned());
}

#[test]
fn singular_values_of_the_rdiagonal_model_follow_p() {
    let (a, p) = rdiagonal_matrix(128, &m("uniform(0,1)"), 2).unwrap();
    let sv = singular_values(&a.matrix).unwrap();
    let mut absp: Vec<f64> = p.iter().map(|v| v.abs()).collect();
    absp.sort_by(|x, y| x.total_cmp(y));
    for (s, q) in sv.values.iter().zip(&absp) {
        assert!((s - q).abs() < 1e-10);
    }
}

#[test]
fn phase_model_has_the_same_modulus() {
    let nu = m("quartercircle(4)");
    let a = phase_model(64, &nu, 4).unwrap();
    let (_, p) = rdiagonal_matrix(64, &nu, 4).unwrap();
    for (i, v) in p.iter().enumerate() {
        assert!((a.matrix[(i, i)].norm() - v.abs()).abs() < 1e-14);
    }
}

#[test]
fn compression_with_d1_is_the_stratified_diagonal() {
    let mu = m("uniform(0,1)");
    let blocks = compressed_entries(&mu, 1, 40, 3).unwrap();
    let vals = diag_values(40, &mu, 0, DiagMode::Stratified);
    for (i, v) in vals.iter().enumerate() {
        assert_eq!(blocks[0][0][(i, i)].re, *v);
    }
}

#[test]
fn compression_d2_semicircle() {
    let blocks = compressed_entries(&m("semicircle(2)"), 2, 256, 11).unwrap();
    let b = reassemble_blocks(&blocks);
    assert!((ntrace(&(&b * &b)).re - 1.0).abs() < 0.05);
    assert!(compression_freeness_residual(&blocks) < 0.05);

    let blocks = compressed_entries(&m("uniform(0,1)"), 2, 256, 12).unwrap();
    assert!((ntrace(&blocks[0][0]).re - 0.5).abs() < 0.05);
    assert!(ntrace(&blocks[0][1]).norm() < 0.05);
}

#[test]
fn empirical_fisher_of_stratified_semicircle() {
    let est = empirical_fisher(&stratified(&m("semicircle(2)"), 2000), &KdeOptions::default()).unwrap();
    assert!((est.value - 1.0).abs() < 0.05, "{est:?}");
    assert!(est.std_error > 0.0 && est.std_error < 0.05);
}

#[test]
fn empirical_fisher_with_reflection_on_uniform() {
    // κ∫ρ³ for uniform[0,1] is κ; reflection removes the edge loss
    let kappa = FisherConstant::default();
    let sample = stratified(&m("uniform(0,1)"), 4000);
    let opts = KdeOptions { support: Some((0.0, 1.0)), ..Default::default() };
    let est = empirical_fisher(&sample, &opts).unwrap();
    let exact = fisher_of_measure(&m("uniform(0,1)"), kappa).unwrap();
    assert!((est.value / exact - 1.0).abs() < 0.02, "{} vs {exact}", est.value);
    let plain = empirical_fisher(&sample, &KdeOptions::default()).unwrap();
    assert!(plain.value < est.value);
}

#[test]
fn empirical_fisher_edge_cases() {
    let constant = SpectralSample::new(vec![1.5; 300], "constant");
    let est = empirical_fisher(&constant, &KdeOptions::default()).unwrap();
    assert!(est.degenerate && est.value == f64::INFINITY);
    let few = SpectralSample::new((0..199).map(|i| i as f64).collect(), "few");
    assert!(matches!(empirical_fisher(&few, &KdeOptions::default()), Err(Error::Input(_))));
}

#[test]
fn empirical_log_energy_examples() {
    let semi = stratified(&m("semicircle(2)"), 2000);
    let e = empirical_log_energy(&semi);
    assert!((e.value + 0.25).abs() < 0.01, "{}", e.value);
    assert_eq!(e.ties_jittered, 0);

    let two = SpectralSample::new(vec![0.0, 1.0], "two");
    assert_eq!(empirical_log_energy(&two).value, 0.0);

    // off-diagonal pairs are N(N-1) of N²
    let lambda = 3.0;
    let n = semi.len() as f64;
    let scaled = empirical_log_energy(&semi.dilate(lambda)).value;
    assert!((scaled - e.value - lambda.ln() * (n - 1.0) / n).abs() < 1e-9);

    let tied = SpectralSample::new(vec![0.0, 0.0, 1.0], "tied");
    let t = empirical_log_energy(&tied);
    assert_eq!(t.ties_jittered, 1);
    assert!(t.value.is_finite());
}

#[test]
fn kolmogorov_distance_of_stratified_sample() {
    let mu = m("semicircle(2)");
    let ks = kolmogorov_distance(&stratified(&mu, 1000), &mu);
    assert!(ks <= 0.5 / 1000.0 + 1e-6, "{ks}");
    let shifted = SpectralSample::new(stratified(&mu, 1000).values.iter().map(|v| v + 0.5).collect(), "shifted");
    assert!(kolmogorov_distance(&shifted, &mu) > 0.1);
}

#[test]
fn spectral_sample_csv() {
    let s = SpectralSample::new(vec![2.0, -1.0], "x");
    let csv = s.to_csv();
    let back: Vec<f64> = csv.lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(back, vec![-1.0, 2.0]);
    assert_eq!(s.moment(2), 2.5);
}

#[test]
fn star_word_traces_match_direct_products() {
    let (a, _) = rdiagonal_matrix(24, &m("uniform(0,1)"), 8).unwrap();
    let a = a.matrix;
    let words = star_words("a", 4);
    let traces = trace_star_words(&a, 4);
    assert_eq!(words.len(), traces.len());
    assert_eq!(words.len(), 2 + 4 + 8 + 16);
    let adj = a.adjoint().to_owned();
    for (w, (stars, t)) in words.iter().zip(&traces) {
        assert_eq!(w.len(), stars.len());
        let mut prod = Mat::<Complex64>::identity(24, 24);
        for &s in stars {
            prod = &prod * if s { &adj } else { &a };
        }
        assert!((ntrace(&prod) - t).norm() < 1e-12, "{w}");
    }
}

#[test]
fn trial_seeds_are_distinct_and_stable() {
    let s = TrialSeeds { master: 1, count: 50 }.seeds();
    let mut sorted = s.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(sorted.len(), 50);
    assert_eq!(s, TrialSeeds { master: 1, count: 50 }.seeds());
}

#[test]
fn monte_carlo_moments_agree_with_symbolic_engine() {
    for name in ["quartercircle(4)", "uniform(0,1)", "pointmass(1)"] {
        let cmp = monte_carlo_star_moments(&m(name), 1024, TrialSeeds { master: 77, count: 20 }, 6, 2e-3).unwrap();
        assert_eq!(cmp.len(), 126);
        let bad: Vec<_> = cmp.iter().filter(|c| !c.pass).collect();
        assert!(bad.is_empty(), "{name}: {bad:?}");
    }
}

#[test]
fn equality_witness_improves_with_n() {
    let nu = m("quartercircle(4)");
    let kappa = FisherConstant::default();
    let target = fisher_of_measure(&nu.symmetric_square_root().unwrap(), kappa).unwrap();
    let error = |n: usize| {
        let mut total = 0.0;
        for s in 0..3 {
            let (a, _) = rdiagonal_matrix(n, &nu, trial_seed(5, s)).unwrap();
            let esd = embedded_spectrum(&a.matrix).unwrap();
            total += (empirical_fisher(&esd, &KdeOptions::default()).unwrap().value - target).abs();
        }
        total / 3.0
    };
    let (small, large) = (error(256), error(512));
    assert!(large < small, "{small} -> {large}");
    assert!(large < 0.1 * target);
}

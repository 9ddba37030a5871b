use faer::{Mat, Side};
use num_complex::Complex64;
use num_rational::BigRational;
use proptest::prelude::*;

use freefisher::engine::{Letter, RDiagonalRepr, Symbol, TraceFunctional, Word};
use freefisher::functionals::{
    conjugate_density, entropy_of_measure, fisher_of_measure, scaling_entropy, scaling_fisher, theorem_bound,
    BoundInput, FisherConstant, TheoremId,
};
use freefisher::ncpartitions::{
    cumulants_from_moments, enumerate_nc, moment_from_cumulants_by_enumeration, moments_from_cumulants,
    word_cumulant_evaluate,
};
use freefisher::rmt::{block_embed_matrix, hermitian_spectrum, rdiagonal_matrix};
use freefisher::scalar::{catalan, rat, Gaussian, Scalar};
use freefisher::CompactMeasure;

fn word(letters: &[(usize, bool)], gens: &[&str]) -> Word {
    Word::from_letters(letters.iter().map(|&(g, s)| Letter::new(Symbol::new(gens[g % gens.len()]), s)))
}

fn mixed_family() -> TraceFunctional<Gaussian> {
    TraceFunctional::builder()
        .semicircular("x", Gaussian::from_i64(1))
        .haar("u")
        .rdiagonal("a", &CompactMeasure::uniform(0.0, 1.0).unwrap(), RDiagonalRepr::Symmetric)
        .unwrap()
        .max_degree(12)
        .build()
        .unwrap()
}

fn beta(a: f64, b: f64, lo: f64, hi: f64) -> CompactMeasure {
    CompactMeasure::beta(a, b, lo, hi).unwrap()
}

#[test]
fn nc_partition_counts_are_catalan() {
    for n in 1..=12 {
        assert_eq!(num_bigint::BigInt::from(enumerate_nc(n).unwrap().len()), catalan(n), "n = {n}");
        assert!(enumerate_nc(n).unwrap().iter().all(|p| !p.has_crossing()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cumulant_moment_round_trip(raw in prop::collection::vec((-20i64..20, 1i64..6), 1..10)) {
        let kappa: Vec<BigRational> = raw.iter().map(|&(p, q)| rat(p, q)).collect();
        let moments = moments_from_cumulants(&kappa);
        prop_assert_eq!(&cumulants_from_moments(&moments), &kappa);
        let n = kappa.len();
        prop_assert_eq!(&moment_from_cumulants_by_enumeration(&kappa, n).unwrap(), &moments[n - 1]);
    }

    #[test]
    fn dilation_composes(a in 1.2f64..4.0, b in 1.2f64..4.0, s in 0.2f64..3.0, t in 0.2f64..3.0) {
        let mu = beta(a, b, -1.0, 2.0);
        let twice = mu.dilate(s).unwrap().dilate(t).unwrap();
        let once = mu.dilate(s * t).unwrap();
        for k in 1..6 {
            let (x, y) = (twice.moment(k).unwrap(), once.moment(k).unwrap());
            prop_assert!((x - y).abs() <= 1e-10 * y.abs().max(1.0));
            let scaled = mu.moment(k).unwrap() * (s * t).powi(k as i32);
            prop_assert!((x - scaled).abs() <= 1e-10 * scaled.abs().max(1.0));
        }
        for q in [0.1, 0.5, 0.9] {
            prop_assert!((twice.quantile(q) - once.quantile(q)).abs() < 1e-9);
        }
    }

    #[test]
    fn square_root_then_square_recovers_moments(a in 1.0f64..4.0, b in 1.0f64..4.0, hi in 0.5f64..4.0) {
        let nu = beta(a, b, 0.0, hi);
        let back = nu.symmetric_square_root().unwrap().push_square().unwrap();
        for k in 0..6 {
            let (x, y) = (back.moment(k).unwrap(), nu.moment(k).unwrap());
            prop_assert!((x - y).abs() <= 1e-10 * y.abs().max(1.0));
        }
        let root = nu.symmetric_square_root().unwrap();
        prop_assert!(root.moment(3).unwrap().abs() < 1e-12);
        prop_assert!((root.moment(2).unwrap() - nu.moment(1).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn scaling_laws_through_the_integrals(a in 1.2f64..4.0, b in 1.2f64..4.0, lambda in 0.3f64..3.0) {
        let kappa = FisherConstant::default();
        let mu = beta(a, b, -1.0, 1.0);
        let scaled = mu.dilate(lambda).unwrap();
        let phi = fisher_of_measure(&mu, kappa).unwrap();
        let phi_scaled = fisher_of_measure(&scaled, kappa).unwrap();
        prop_assert!((phi_scaled - scaling_fisher(phi, lambda).unwrap()).abs() <= 1e-8 * phi_scaled);
        let chi = entropy_of_measure(&mu).unwrap();
        let chi_scaled = entropy_of_measure(&scaled).unwrap();
        prop_assert!((chi_scaled - scaling_entropy(chi, lambda).unwrap()).abs() <= 1e-8);
    }

    #[test]
    fn free_cramer_rao(a in 1.1f64..6.0) {
        // Φ*(μ)·Var(μ) ≥ 1, with equality for the semicircle (a = 3/2)
        let mu = beta(a, a, -1.0, 1.0);
        let var = mu.moment(2).unwrap();
        let phi = fisher_of_measure(&mu, FisherConstant::default()).unwrap();
        prop_assert!(phi * var >= 1.0 - 1e-10, "a = {}: {}", a, phi * var);
    }

    #[test]
    fn entropy_bound_chain(a in 1.2f64..4.0, b in 1.2f64..4.0, hi in 0.5f64..4.0, d in 1u32..5) {
        let kappa = FisherConstant::default();
        let inp = BoundInput::Measure(beta(a, b, 0.0, hi));
        let t14 = theorem_bound(TheoremId::T14, &inp, d, kappa).unwrap().value;
        let t15 = theorem_bound(TheoremId::T15_1, &inp, d, kappa).unwrap().value;
        prop_assert!((t14 - t15).abs() <= 1e-12 * t14.abs().max(1.0));
        let t11 = theorem_bound(TheoremId::T11, &inp, 1, kappa).unwrap().value;
        let t13 = theorem_bound(TheoremId::T13, &inp, d, kappa).unwrap().value;
        prop_assert!((t13 - (d as f64).powi(3) * t11).abs() <= 1e-12 * t13);
    }

    #[test]
    fn block_embedding_identity(n in 1usize..10, entries in prop::collection::vec(-3.0f64..3.0, 200)) {
        let m = Mat::from_fn(n, n, |i, j| Complex64::new(entries[2 * (i * n + j)], entries[2 * (i * n + j) + 1]));
        let eig = hermitian_spectrum(&block_embed_matrix(&m), "embed").unwrap().values;
        let sv = m.singular_values().unwrap();
        let mut pm: Vec<f64> = sv.iter().map(|s| -s).chain(sv.iter().copied()).collect();
        pm.sort_by(|x, y| x.total_cmp(y));
        for (x, y) in eig.iter().zip(&pm) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn evaluation_paths_agree(letters in prop::collection::vec((0usize..3, any::<bool>()), 0..9)) {
        let f = mixed_family();
        let w = word(&letters, &["x", "u", "a"]);
        prop_assert_eq!(f.evaluate(&w).unwrap(), word_cumulant_evaluate(&f, &w).unwrap());
    }

    #[test]
    fn functional_is_tracial(letters in prop::collection::vec((0usize..3, any::<bool>()), 1..9), shift in 0usize..8) {
        let f = mixed_family();
        let w = word(&letters, &["x", "u", "a"]);
        prop_assert_eq!(f.evaluate(&w).unwrap(), f.evaluate(&w.rotate(shift % w.len())).unwrap());
        prop_assert_eq!(f.evaluate(&w.adjoint()).unwrap(), f.evaluate(&w).unwrap().conj());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rdiagonal_representations_agree(stars in prop::collection::vec(any::<bool>(), 1..11)) {
        let nu = CompactMeasure::quartercircle(4.0).unwrap();
        let build = |repr| {
            TraceFunctional::<Gaussian>::builder().rdiagonal("a", &nu, repr).unwrap().max_degree(10).build().unwrap()
        };
        let w = Word::from_letters(stars.iter().map(|&s| Letter::new(Symbol::new("a"), s)));
        prop_assert_eq!(build(RDiagonalRepr::Symmetric).evaluate(&w).unwrap(), build(RDiagonalRepr::TwoSided).evaluate(&w).unwrap());
    }

    #[test]
    fn gram_matrices_are_psd(words in prop::collection::vec(prop::collection::vec((0usize..3, any::<bool>()), 0..4), 1..6)) {
        let f = TraceFunctional::<Complex64>::builder()
            .semicircular("x", Complex64::new(1.0, 0.0))
            .haar("u")
            .circular("c", Complex64::new(1.0, 0.0))
            .unwrap()
            .build()
            .unwrap();
        let ws: Vec<Word> = words.iter().map(|l| word(l, &["x", "u", "c"])).collect();
        let g = Mat::from_fn(ws.len(), ws.len(), |i, j| f.evaluate(&ws[i].adjoint().concat(&ws[j])).unwrap());
        let ev = g.self_adjoint_eigenvalues(Side::Lower).unwrap();
        prop_assert!(ev.iter().all(|&v| v >= -1e-9), "{:?}", ev);
    }

    #[test]
    fn rdiagonal_matrix_is_deterministic(seed in any::<u64>()) {
        let nu = CompactMeasure::uniform(0.0, 1.0).unwrap();
        let (a, p) = rdiagonal_matrix(12, &nu, seed).unwrap();
        let (b, q) = rdiagonal_matrix(12, &nu, seed).unwrap();
        prop_assert!(a.matrix == b.matrix);
        prop_assert_eq!(p, q);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn conjugate_density_norm_is_fisher(a in 1.5f64..4.0, b in 1.5f64..4.0) {
        let mu = beta(a, b, -1.0, 1.5);
        let h = conjugate_density(&mu).unwrap();
        let phi = fisher_of_measure(&mu, FisherConstant::default()).unwrap();
        prop_assert!((h.norm_squared().unwrap() - phi).abs() <= 1e-6 * phi.max(1.0));
    }
}

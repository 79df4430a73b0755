mod common;

use common::{project_into_span, rng, tol};
use povmlab::hs::{moore_penrose, vectorize, Operator, C64};
use povmlab::povm::{alternate_dual, canonical_dual};
use povmlab::processing::{
    ensemble_error, estimate, min_error, min_norm_residual, optimal_dual, processing_from_dual,
};
use povmlab::random::{ginibre, random_ensemble, random_hermitian, random_mixed_state, random_povm};
use proptest::prelude::*;
use rand::Rng;

fn random_y(d: usize, n: usize, seed: u64) -> Vec<Operator> {
    let mut g = rng(seed);
    (0..n).map(|_| Operator::from_matrix(ginibre(d, d, &mut g)).unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn estimates_do_not_depend_on_the_dual(d in 2usize..4, extra in 0usize..8, seed in any::<u64>()) {
        let mut g = rng(seed);
        let p = random_povm(d, d + extra, &mut g);
        let x = project_into_span(p.elements(), &random_hermitian(d, &mut g));
        let can = canonical_dual(&p, &tol());
        let alt = alternate_dual(&p, &can, &random_y(d, p.len(), g.random())).unwrap().symmetrized();
        let c1 = processing_from_dual(&p, &can, &x, &tol()).unwrap();
        let c2 = processing_from_dual(&p, &alt, &x, &tol()).unwrap();
        let scale = alt.elements.iter().chain(&can.elements).map(Operator::norm).fold(1.0, f64::max);
        for _ in 0..4 {
            let rho = random_mixed_state(d, &mut g);
            let truth = x.expectation(&rho).re;
            prop_assert!((estimate(&p, &c1, &rho).unwrap() - truth).abs() <= 1e-9 * scale);
            prop_assert!((estimate(&p, &c2, &rho).unwrap() - truth).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn optimal_dual_properties(d in 2usize..4, extra in 0usize..8, k in 1usize..5, seed in any::<u64>()) {
        let mut g = rng(seed);
        let p = random_povm(d, d + extra, &mut g);
        let e = random_ensemble(d, k, &mut g);
        let opt = optimal_dual(&p, &e, &tol()).unwrap();
        let scale = opt.elements.iter().map(Operator::norm).fold(1.0, f64::max);
        prop_assert!(opt.resolution_residual(&p, &tol()).unwrap() <= 1e-9 * scale);
        prop_assert!(opt.max_self_adjoint_deviation() <= 1e-9 * scale);
        prop_assert!(min_norm_residual(&p, &opt, &e) <= 1e-9 * scale);
        let pi = e.metric(&p).diag;
        for (dual, &w) in opt.elements.iter().zip(&pi) {
            if w > tol().eig_zero {
                prop_assert!((dual.trace().re - 1.0).abs() <= 1e-9 * scale);
            }
        }
    }

    #[test]
    fn optimal_dual_matches_metric_inverse_form(d in 2usize..4, extra in 0usize..8, k in 1usize..5, seed in any::<u64>()) {
        let mut g = rng(seed);
        let p = random_povm(d, d + extra, &mut g);
        let e = random_ensemble(d, k, &mut g);
        let pi = e.metric(&p).diag;
        let mut metric = nalgebra::DMatrix::<C64>::zeros(d * d, d * d);
        for (elem, &w) in p.elements().iter().zip(&pi) {
            let v = vectorize(elem);
            metric += v.entries() * v.entries().adjoint() * C64::new(1.0 / w, 0.0);
        }
        let inv = moore_penrose(&metric);
        let opt = optimal_dual(&p, &e, &tol()).unwrap();
        let scale = opt.elements.iter().map(Operator::norm).fold(1.0, f64::max);
        for ((elem, &w), dual) in p.elements().iter().zip(&pi).zip(&opt.elements) {
            let v = &inv * vectorize(elem).entries() * C64::new(1.0 / w, 0.0);
            let oracle = Operator::from_matrix(nalgebra::DMatrix::from_fn(d, d, |m, n| v[m * d + n])).unwrap();
            prop_assert!((&oracle - dual).norm() <= 1e-8 * scale);
        }
    }

    #[test]
    fn min_error_matches_optimal_processing_and_beats_alternates(
        d in 2usize..4, extra in 0usize..8, seed in any::<u64>()
    ) {
        let mut g = rng(seed);
        let p = random_povm(d, d + extra, &mut g);
        let e = random_ensemble(d, 3, &mut g);
        let x = project_into_span(p.elements(), &random_hermitian(d, &mut g));
        let opt = optimal_dual(&p, &e, &tol()).unwrap();
        let best = ensemble_error(&p, &processing_from_dual(&p, &opt, &x, &tol()).unwrap(), &e, &tol()).unwrap();
        let formula = min_error(&p, &e, &x, &tol()).unwrap();
        prop_assert!((best - formula).abs() <= 1e-9 * best.abs().max(1.0));
        let can = canonical_dual(&p, &tol());
        for _ in 0..10 {
            let alt = alternate_dual(&p, &can, &random_y(d, p.len(), g.random())).unwrap().symmetrized();
            let c = processing_from_dual(&p, &alt, &x, &tol()).unwrap();
            prop_assert!(best <= ensemble_error(&p, &c, &e, &tol()).unwrap() + 1e-9 * best.abs().max(1.0));
        }
    }

    #[test]
    fn min_error_is_shift_invariant(d in 2usize..4, extra in 0usize..6, shift in -5.0f64..5.0, seed in any::<u64>()) {
        let mut g = rng(seed);
        let p = random_povm(d, d + extra, &mut g);
        let e = random_ensemble(d, 2, &mut g);
        let x = project_into_span(p.elements(), &random_hermitian(d, &mut g));
        let shifted = &x + &(Operator::identity(d) * shift);
        let a = min_error(&p, &e, &x, &tol()).unwrap();
        let b = min_error(&p, &e, &shifted, &tol()).unwrap();
        prop_assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0));
    }
}

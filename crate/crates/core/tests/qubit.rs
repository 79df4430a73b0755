mod common;

use std::f64::consts::FRAC_PI_2;

use common::{rng, tol};
use povmlab::povm::rank_one_refinement;
use povmlab::processing::min_error;
use povmlab::qubit::{noise_quantities, sigma_pm, symmetrize_delta, BlochPovm};
use povmlab::random::random_xy_rank_one_povm;
use povmlab::{Ensemble, Operator, Povm};
use proptest::prelude::*;

fn blurred(p: &Povm, t: f64) -> Povm {
    let n = p.len() as f64;
    let id = Operator::identity(2);
    let elements = p.elements().iter().map(|e| &(e * (1.0 - t)) + &(&id * (t / n))).collect();
    Povm::new(elements, &tol()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn total_error_never_beats_the_bound(n in 3usize..9, theta in 0.02f64..(FRAC_PI_2 - 0.02), seed in any::<u64>()) {
        let p = BlochPovm::from_povm(&random_xy_rank_one_povm(n, &mut rng(seed))).unwrap();
        let s = noise_quantities(&p, &Ensemble::isotropic_six_state(), theta, &tol()).unwrap();
        prop_assert!(s.total_error >= s.bound - 1e-9, "{} < {}", s.total_error, s.bound);
    }

    #[test]
    fn bloch_route_agrees_with_min_error(n in 3usize..9, theta in 0.02f64..(FRAC_PI_2 - 0.02), t in 0.0f64..0.5, seed in any::<u64>()) {
        let p = blurred(&random_xy_rank_one_povm(n, &mut rng(seed)), t);
        let e = Ensemble::isotropic_six_state();
        let s = noise_quantities(&BlochPovm::from_povm(&p).unwrap(), &e, theta, &tol()).unwrap();
        let (sp, sm) = sigma_pm(theta);
        let generic = min_error(&p, &e, &sp, &tol()).unwrap() + min_error(&p, &e, &sm, &tol()).unwrap();
        prop_assert!((s.total_error - generic).abs() <= 1e-9 * generic.max(1.0));
    }

    #[test]
    fn shifting_by_the_identity_changes_nothing(n in 3usize..7, theta in 0.02f64..(FRAC_PI_2 - 0.02), k in -4.0f64..4.0, seed in any::<u64>()) {
        let p = random_xy_rank_one_povm(n, &mut rng(seed));
        let e = Ensemble::isotropic_six_state();
        let (sp, _) = sigma_pm(theta);
        let shifted = &sp + &(Operator::identity(2) * k);
        let a = min_error(&p, &e, &sp, &tol()).unwrap();
        let b = min_error(&p, &e, &shifted, &tol()).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }

    #[test]
    fn refinement_stays_in_the_xy_plane(n in 3usize..7, t in 0.05f64..0.9, seed in any::<u64>()) {
        let p = blurred(&random_xy_rank_one_povm(n, &mut rng(seed)), t);
        let r = rank_one_refinement(&p, &tol());
        for c in BlochPovm::from_povm(&r).unwrap().coeffs {
            prop_assert!(c[3].abs() <= 1e-12);
        }
    }

    #[test]
    fn symmetrizing_removes_the_correlation(n in 3usize..7, theta in 0.02f64..(FRAC_PI_2 - 0.02), seed in any::<u64>()) {
        let p = BlochPovm::from_povm(&random_xy_rank_one_povm(n, &mut rng(seed))).unwrap();
        let e = Ensemble::isotropic_six_state();
        let before = noise_quantities(&p, &e, theta, &tol()).unwrap();
        let sym = symmetrize_delta(&p);
        prop_assert!(sym.constraint_residual() <= 1e-12);
        let after = noise_quantities(&sym, &e, theta, &tol()).unwrap();
        prop_assert!(after.delta.abs() <= 1e-12);
        prop_assert!((after.b - before.b).abs() <= 1e-12 && (after.gamma - before.gamma).abs() <= 1e-12);
        prop_assert!(after.dtm >= before.dtm - 1e-12);
        prop_assert!(after.total_error <= before.total_error + 1e-9);
    }
}

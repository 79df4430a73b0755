mod common;

use std::f64::consts::FRAC_PI_4;

use common::{project_into_span, rng, tol};
use povmlab::montecarlo::{apply_markov, empirical_estimate, outcome_probabilities, predict, sample, simulate};
use povmlab::postproc::blur_for_post_processing;
use povmlab::povm::canonical_dual;
use povmlab::processing::{optimal_dual, processing_from_dual};
use povmlab::qubit::{optimal_four_outcome, sigma_pm};
use povmlab::random::{random_hermitian, random_mixed_state, random_povm};
use povmlab::{Ensemble, Operator, Povm};

fn real_coefficients(p: &Povm, dual: &povmlab::DualFrame, x: &Operator) -> Vec<f64> {
    processing_from_dual(p, dual, x, &tol()).unwrap().coefficients.iter().map(|c| c.re).collect()
}

/// Least-squares slope of `ln y` against `ln x`.
fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    cov / var
}

#[test]
fn estimation_error_shrinks_as_inverse_square_root() {
    let p = Povm::qubit_sic();
    let rho = Operator::bloch(0.5, 0.2, -0.1, 0.3);
    let x = Operator::sigma_z();
    let c = real_coefficients(&p, &canonical_dual(&p, &tol()), &x);
    let truth = x.expectation(&rho).re;
    let ns: Vec<f64> = (0..9).map(|k| 1000.0 * 2f64.powi(k)).collect();
    let rms: Vec<f64> = ns
        .iter()
        .map(|&n| {
            let sq: f64 = (0..48u64)
                .map(|seed| {
                    let run = sample(&p, &rho, n as u64, seed, &tol()).unwrap();
                    (empirical_estimate(&run, &c).unwrap().mean - truth).powi(2)
                })
                .sum();
            (sq / 48.0).sqrt()
        })
        .collect();
    let slope = log_log_slope(&ns, &rms);
    assert!((slope + 0.5).abs() <= 0.1, "slope {slope}");
}

#[test]
fn pooled_six_state_error_matches_prediction() {
    let theta = FRAC_PI_4;
    let p = optimal_four_outcome(theta, &tol()).unwrap();
    let e = Ensemble::isotropic_six_state();
    let dual = optimal_dual(&p, &e, &tol()).unwrap();
    let (sp, sm) = sigma_pm(theta);
    for x in [sp, sm] {
        let c = real_coefficients(&p, &dual, &x);
        let pooled: f64 = e
            .states()
            .iter()
            .enumerate()
            .map(|(j, s)| s.q * simulate(&p, &s.rho, &c, 100_000, 100 + j as u64, &tol()).unwrap().variance)
            .sum();
        assert!((pooled - 5.0 / 3.0).abs() <= 0.03 * 5.0 / 3.0, "pooled {pooled}");
    }
}

#[test]
fn random_cases_are_calibrated_and_reproducible() {
    let mut g = rng(11);
    for case in 0..10u64 {
        let d = 2 + (case as usize % 3);
        let p = random_povm(d, d * d + 1, &mut g);
        let rho = random_mixed_state(d, &mut g);
        let x = project_into_span(p.elements(), &random_hermitian(d, &mut g));
        let c = real_coefficients(&p, &canonical_dual(&p, &tol()), &x);
        let report = simulate(&p, &rho, &c, 100_000, case, &tol()).unwrap();
        assert!(report.z_score.abs() < 5.0, "case {case}: mean z {}", report.z_score);
        assert!(report.variance_z_score.abs() < 5.0, "case {case}: variance z {}", report.variance_z_score);
        assert_eq!(report, simulate(&p, &rho, &c, 100_000, case, &tol()).unwrap());
    }
}

#[test]
fn blurred_pipeline_inflates_the_variance() {
    let sic = Povm::qubit_sic();
    let z = Povm::sigma_z_projective();
    let e = Ensemble::isotropic_six_state();
    let blur = blur_for_post_processing(&sic, &z, &e, &tol()).unwrap();
    let eps = blur.epsilon_star;
    let m = blur.outcomes() as f64;
    // Per-shot retrieval of outcome 0: (1[j = 0] - ε/M) / (1 - ε).
    let retrieve: Vec<f64> = (0..blur.outcomes())
        .map(|j| ((j == 0) as u8 as f64 - eps / m) / (1.0 - eps))
        .collect();
    let indicator = [1.0, 0.0];
    let n = 1_000_000;

    let rho = Operator::identity(2) * 0.5;
    let blurred = apply_markov(&sample(&sic, &rho, n, 5, &tol()).unwrap(), &blur.markov, 6).unwrap();
    let direct = sample(&z, &rho, n, 7, &tol()).unwrap();
    let inflated = empirical_estimate(&blurred, &retrieve).unwrap();
    let plain = empirical_estimate(&direct, &indicator).unwrap();
    let ratio = inflated.variance / plain.variance;
    assert!((ratio / blur.inflation - 1.0).abs() <= 0.1, "ratio {ratio} vs {}", blur.inflation);

    let mut g = rng(3);
    for seed in 0..5u64 {
        let rho = random_mixed_state(2, &mut g);
        let run = apply_markov(&sample(&sic, &rho, n, seed, &tol()).unwrap(), &blur.markov, seed + 50).unwrap();
        let blurred_probs = outcome_probabilities(&blur.blurred, &rho, &tol()).unwrap();
        let pred = predict(&blurred_probs, &retrieve).unwrap();
        let est = empirical_estimate(&run, &retrieve).unwrap();
        assert!((pred.mean - z.elements()[0].expectation(&rho).re).abs() <= 1e-12);
        assert!(pred.mean_z(&est, n).abs() < 5.0);
        assert!(pred.variance_z(&est, n).abs() < 5.0);
    }
}

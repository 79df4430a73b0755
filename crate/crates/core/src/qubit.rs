//! Closed-form qubit solution for the joint estimation of
//! `σ_±(θ) = σ_x cos θ ± σ_y sin θ` under isotropic ensembles.

use std::f64::consts::FRAC_PI_2;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hs::Operator;
use crate::povm::Povm;
use crate::processing::Ensemble;
use crate::tol::Tolerances;

/// Maximum `||rho_E - I/2||` accepted as isotropic.
pub const ISOTROPY_TOL: f64 = 1e-9;

/// Bloch coefficients `(α, β, γ, δ)` with `P = αI + βσ_x + γσ_y + δσ_z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochPovm {
    pub coeffs: Vec<[f64; 4]>,
}

impl BlochPovm {
    pub fn from_povm(p: &Povm) -> Result<Self> {
        if p.dim() != 2 {
            return Err(Error::NotQubit(p.dim()));
        }
        let paulis = [Operator::identity(2), Operator::sigma_x(), Operator::sigma_y(), Operator::sigma_z()];
        let coeffs = p
            .elements()
            .iter()
            .map(|e| {
                let mut c = [0.0; 4];
                for (k, s) in paulis.iter().enumerate() {
                    c[k] = (e * s).trace().re / 2.0;
                }
                c
            })
            .collect();
        Ok(Self { coeffs })
    }

    pub fn to_povm(&self, tol: &Tolerances) -> Result<Povm> {
        Povm::new(self.operators(), tol)
    }

    pub fn operators(&self) -> Vec<Operator> {
        self.coeffs.iter().map(|&[a, b, c, e]| Operator::bloch(a, b, c, e)).collect()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest violation of positivity (`|r_i| <= α_i`) and normalization.
    pub fn constraint_residual(&self) -> f64 {
        let mut sums = [0.0; 4];
        let mut worst: f64 = 0.0;
        for c in &self.coeffs {
            for k in 0..4 {
                sums[k] += c[k];
            }
            let r = (c[1] * c[1] + c[2] * c[2] + c[3] * c[3]).sqrt();
            worst = worst.max(r - c[0]).max(-c[0]);
        }
        worst.max((sums[0] - 1.0).abs()).max(sums[1].abs()).max(sums[2].abs()).max(sums[3].abs())
    }
}

/// `(σ_+(θ), σ_-(θ))`.
pub fn sigma_pm(theta: f64) -> (Operator, Operator) {
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        warn!("θ = {theta} lies outside (0, π/2); σ_+ and σ_- commute or swap roles");
    }
    let (s, c) = theta.sin_cos();
    let x = Operator::sigma_x() * c;
    let y = Operator::sigma_y() * s;
    (&x + &y, &x - &y)
}

/// `κ = ½(Σ_j q_j <σ_+>_j² + Σ_j q_j <σ_->_j²)`.
pub fn kappa(e: &Ensemble, theta: f64) -> f64 {
    let (sp, sm) = sigma_pm(theta);
    0.5 * (e.second_moment(&sp) + e.second_moment(&sm))
}

/// `2(1 + sin 2θ - κ)`.
pub fn error_bound(theta: f64, kappa: f64) -> f64 {
    2.0 * (1.0 + (2.0 * theta).sin() - kappa)
}

/// Minimizer of `cos²θ/B + sin²θ/(2-B)` over `(0, 2)`.
pub fn optimal_b(theta: f64) -> Result<f64> {
    check_theta(theta)?;
    let (s, c) = theta.sin_cos();
    Ok(2.0 * c / (c + s))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSummary {
    pub b: f64,
    pub gamma: f64,
    pub delta: f64,
    /// `BΓ - Δ²`.
    pub dtm: f64,
    pub kappa: f64,
    /// Minimal total error `δ²(σ_+) + δ²(σ_-)`; infinite when `D = 0`.
    #[serde(deserialize_with = "crate::tol::nullable_f64")]
    pub total_error: f64,
    pub bound: f64,
    /// `4(cos²θ/B + sin²θ/(2-B) - κ/2)`, reported when `B + Γ = 2` and `Δ = 0`.
    pub simplified: Option<f64>,
}

impl NoiseSummary {
    pub fn gap(&self) -> f64 {
        self.total_error - self.bound
    }
}

pub fn check_isotropic(e: &Ensemble) -> Result<()> {
    if e.dim() != 2 {
        return Err(Error::NotQubit(e.dim()));
    }
    let dev = (e.barycenter() - &(Operator::identity(2) * 0.5)).norm();
    if dev > ISOTROPY_TOL {
        return Err(Error::NotIsotropic(dev));
    }
    Ok(())
}

/// B, Γ, Δ and the total error of the optimal processing of `p` for
/// `σ_±(θ)` under an isotropic ensemble.
///
/// With `π_i = α_i` the minimal error of `X = x·σ` is
/// `2 x^T [[B, -Δ], [-Δ, Γ]]^{-1} x - Σ_j q_j <X>_j²`, so the pair totals
/// `4(Γ cos²θ + B sin²θ)/D - 2κ`.
pub fn noise_quantities(p: &BlochPovm, e: &Ensemble, theta: f64, tol: &Tolerances) -> Result<NoiseSummary> {
    check_isotropic(e)?;
    let (mut b, mut gamma, mut delta) = (0.0, 0.0, 0.0);
    for (i, &[a, be, ga, de]) in p.coeffs.iter().enumerate() {
        if a <= tol.eig_zero {
            if (be * be + ga * ga + de * de).sqrt() > tol.psd_slack {
                return Err(Error::ZeroAlpha(i));
            }
            continue;
        }
        b += 2.0 * be * be / a;
        gamma += 2.0 * ga * ga / a;
        delta -= 2.0 * be * ga / a;
    }
    let dtm = b * gamma - delta * delta;
    let k = kappa(e, theta);
    let (s, c) = theta.sin_cos();
    let total_error = if dtm > tol.eig_zero {
        4.0 * (gamma * c * c + b * s * s) / dtm - 2.0 * k
    } else {
        f64::INFINITY
    };
    let simplified = ((b + gamma - 2.0).abs() <= tol.lin_solve && delta.abs() <= tol.lin_solve && b > 0.0 && b < 2.0)
        .then(|| 4.0 * (c * c / b + s * s / (2.0 - b) - k / 2.0));
    if let Some(v) = simplified {
        if (v - total_error).abs() > tol.lin_solve * total_error.abs().max(1.0) {
            warn!("simplified total error {v} disagrees with {total_error}");
        }
    }
    Ok(NoiseSummary { b, gamma, delta, dtm, kappa: k, total_error, bound: error_bound(theta, k), simplified })
}

/// `½(P ∪ P')` where `P'` flips every `γ_i`.
pub fn symmetrize_delta(p: &BlochPovm) -> BlochPovm {
    let half = |[a, b, c, d]: [f64; 4], sign: f64| [a / 2.0, b / 2.0, sign * c / 2.0, d / 2.0];
    let coeffs = p
        .coeffs
        .iter()
        .map(|&c| half(c, 1.0))
        .chain(p.coeffs.iter().map(|&c| half(c, -1.0)))
        .collect();
    BlochPovm { coeffs }
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return Err(Error::InvalidParameter(format!("θ = {theta} outside [0, π/2]")));
    }
    if theta == 0.0 || theta == FRAC_PI_2 {
        warn!("θ = {theta} is a commuting endpoint; the optimal POVM degenerates");
    }
    Ok(())
}

/// Three-outcome bound-achieving POVM, `p = cos θ / (2 cos θ + sin θ)`.
pub fn optimal_three_outcome_bloch(theta: f64) -> Result<BlochPovm> {
    check_theta(theta)?;
    let (s, c) = theta.sin_cos();
    let p = c / (2.0 * c + s);
    let y = (1.0 - 2.0 * p).max(0.0).sqrt() / 2.0;
    Ok(BlochPovm {
        coeffs: vec![[p, p, 0.0, 0.0], [(1.0 - p) / 2.0, -p / 2.0, y, 0.0], [(1.0 - p) / 2.0, -p / 2.0, -y, 0.0]],
    })
}

/// Four-outcome bound-achieving POVM, `p = cos θ / (cos θ + sin θ)`.
pub fn optimal_four_outcome_bloch(theta: f64) -> Result<BlochPovm> {
    check_theta(theta)?;
    let (s, c) = theta.sin_cos();
    let p = c / (c + s);
    let q = 1.0 - p;
    Ok(BlochPovm {
        coeffs: vec![
            [p / 2.0, p / 2.0, 0.0, 0.0],
            [p / 2.0, -p / 2.0, 0.0, 0.0],
            [q / 2.0, 0.0, q / 2.0, 0.0],
            [q / 2.0, 0.0, -q / 2.0, 0.0],
        ],
    })
}

fn labelled(b: BlochPovm, labels: &[&str], tol: &Tolerances) -> Result<Povm> {
    let labels = labels.iter().map(|s| s.to_string()).collect();
    Povm::with_labels(b.operators(), Some(labels), tol)
}

pub fn optimal_three_outcome(theta: f64, tol: &Tolerances) -> Result<Povm> {
    labelled(optimal_three_outcome_bloch(theta)?, &["1", "2+", "2-"], tol)
}

pub fn optimal_four_outcome(theta: f64, tol: &Tolerances) -> Result<Povm> {
    labelled(optimal_four_outcome_bloch(theta)?, &["1+", "1-", "2+", "2-"], tol)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Three,
    Four,
}

impl Family {
    pub fn bloch(self, theta: f64) -> Result<BlochPovm> {
        match self {
            Family::Three => optimal_three_outcome_bloch(theta),
            Family::Four => optimal_four_outcome_bloch(theta),
        }
    }

    pub fn povm(self, theta: f64, tol: &Tolerances) -> Result<Povm> {
        match self {
            Family::Three => optimal_three_outcome(theta, tol),
            Family::Four => optimal_four_outcome(theta, tol),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub theta: f64,
    pub b: f64,
    pub gamma: f64,
    pub delta: f64,
    #[serde(deserialize_with = "crate::tol::nullable_f64")]
    pub total_error: f64,
    pub bound: f64,
    #[serde(deserialize_with = "crate::tol::nullable_f64")]
    pub gap: f64,
}

/// Noise summary of an optimal family over a grid of angles, one row per
/// angle in input order.
pub fn sweep(thetas: &[f64], family: Family, e: &Ensemble, tol: &Tolerances) -> Result<Vec<SweepRow>> {
    check_isotropic(e)?;
    thetas
        .par_iter()
        .map(|&theta| {
            let n = noise_quantities(&family.bloch(theta)?, e, theta, tol)?;
            Ok(SweepRow {
                theta,
                b: n.b,
                gamma: n.gamma,
                delta: n.delta,
                total_error: n.total_error,
                bound: n.bound,
                gap: n.gap(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6, FRAC_PI_8};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn bloch_roundtrip_examples() {
        let b = BlochPovm::from_povm(&Povm::sigma_z_projective()).unwrap();
        assert_eq!(b.coeffs, vec![[0.5, 0.0, 0.0, -0.5], [0.5, 0.0, 0.0, 0.5]]);
        let sic = Povm::qubit_sic();
        let b = BlochPovm::from_povm(&sic).unwrap();
        for (c, n) in b.coeffs.iter().zip(crate::povm::tetrahedron()) {
            assert_abs_diff_eq!(c[0], 0.25, epsilon = 1e-15);
            for k in 0..3 {
                assert_abs_diff_eq!(c[k + 1], n[k] / 4.0, epsilon = 1e-15);
            }
        }
        let back = b.to_povm(&tol()).unwrap();
        for (x, y) in back.elements().iter().zip(sic.elements()) {
            assert!((x - y).norm() < 1e-15);
        }
        assert!(matches!(BlochPovm::from_povm(&Povm::trivial(3)), Err(Error::NotQubit(3))));

        let three = BlochPovm::from_povm(&optimal_three_outcome(FRAC_PI_4, &tol()).unwrap()).unwrap();
        let r = 1.0 / (2.0 * 3f64.sqrt());
        let expect = [[1. / 3., 1. / 3., 0., 0.], [1. / 3., -1. / 6., r, 0.], [1. / 3., -1. / 6., -r, 0.]];
        for (c, e) in three.coeffs.iter().zip(expect) {
            for k in 0..4 {
                assert_abs_diff_eq!(c[k], e[k], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn sigma_pm_examples() {
        let (p, m) = sigma_pm(0.0);
        assert!((&p - &Operator::sigma_x()).norm() < 1e-15);
        assert!((&m - &Operator::sigma_x()).norm() < 1e-15);
        let (p, m) = sigma_pm(FRAC_PI_4);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((&p - &(Operator::sigma_x() * h + Operator::sigma_y() * h)).norm() < 1e-15);
        assert!((&m - &(Operator::sigma_x() * h - Operator::sigma_y() * h)).norm() < 1e-15);
        let (p, m) = sigma_pm(FRAC_PI_2);
        assert!((&p - &Operator::sigma_y()).norm() < 1e-15);
        assert!((&m + &Operator::sigma_y()).norm() < 1e-15);
        // [σ_+, σ_-] = -2i sin 2θ σ_z.
        let theta = 0.3;
        let (p, m) = sigma_pm(theta);
        let expect = &Operator::sigma_z() * crate::hs::C64::new(0.0, -2.0 * (2.0 * theta).sin());
        assert!((&p.commutator(&m) - &expect).norm() < 1e-14);
    }

    #[test]
    fn noise_examples() {
        let e = Ensemble::isotropic_six_state();
        let n = noise_quantities(&optimal_four_outcome_bloch(FRAC_PI_4).unwrap(), &e, FRAC_PI_4, &tol()).unwrap();
        assert_abs_diff_eq!(n.b, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(n.gamma, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(n.delta, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(n.dtm, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(n.kappa, 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(n.total_error, 10.0 / 3.0, epsilon = 1e-13);

        let n = noise_quantities(&optimal_three_outcome_bloch(FRAC_PI_4).unwrap(), &e, FRAC_PI_4, &tol()).unwrap();
        assert_abs_diff_eq!(n.b, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(n.gamma, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(n.delta, 0.0, epsilon = 1e-14);

        for theta in [0.2, 0.7, 1.1] {
            let n = noise_quantities(&optimal_four_outcome_bloch(theta).unwrap(), &e, theta, &tol()).unwrap();
            let (s, c) = theta.sin_cos();
            assert_abs_diff_eq!(n.b, 2.0 * c / (c + s), epsilon = 1e-14);
            assert_abs_diff_eq!(n.simplified.unwrap(), n.total_error, epsilon = 1e-12);
        }

        let skew = Ensemble::new(
            vec![crate::processing::WeightedState { q: 1.0, rho: Operator::bloch(0.5, 0.0, 0.0, 0.5) }],
            &tol(),
        )
        .unwrap();
        assert!(matches!(
            noise_quantities(&optimal_four_outcome_bloch(0.5).unwrap(), &skew, 0.5, &tol()),
            Err(Error::NotIsotropic(_))
        ));
    }

    #[test]
    fn bound_examples() {
        assert_abs_diff_eq!(error_bound(FRAC_PI_4, 0.0), 4.0, epsilon = 1e-15);
        let k = kappa(&Ensemble::isotropic_six_state(), FRAC_PI_4);
        assert_abs_diff_eq!(error_bound(FRAC_PI_4, k), 10.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(error_bound(FRAC_PI_8, 0.0), 2.0 * (1.0 + 0.5f64.sqrt()), epsilon = 1e-14);
    }

    #[test]
    fn optimal_b_examples() {
        assert_abs_diff_eq!(optimal_b(FRAC_PI_4).unwrap(), 1.0, epsilon = 1e-15);
        let s3 = 3f64.sqrt();
        let b = optimal_b(FRAC_PI_6).unwrap();
        assert_abs_diff_eq!(b, 2.0 * s3 / (s3 + 1.0), epsilon = 1e-14);
        // Golden-section oracle on f(B) = cos²θ/B + sin²θ/(2-B).
        let (s, c) = FRAC_PI_6.sin_cos();
        let f = |x: f64| c * c / x + s * s / (2.0 - x);
        let (mut lo, mut hi) = (1e-9, 2.0 - 1e-9);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let x1 = hi - g * (hi - lo);
            let x2 = lo + g * (hi - lo);
            if f(x1) < f(x2) {
                hi = x2;
            } else {
                lo = x1;
            }
        }
        assert_abs_diff_eq!(b, (lo + hi) / 2.0, epsilon = 1e-7);
        assert_abs_diff_eq!(optimal_b(1e-12).unwrap(), 2.0, epsilon = 1e-11);
        assert!(optimal_b(-0.1).is_err());
    }

    #[test]
    fn symmetrize_examples() {
        let e = Ensemble::isotropic_six_state();
        let four = optimal_four_outcome_bloch(0.6).unwrap();
        let sym = symmetrize_delta(&four);
        assert_eq!(sym.len(), 8);
        let a = noise_quantities(&four, &e, 0.6, &tol()).unwrap();
        let b = noise_quantities(&sym, &e, 0.6, &tol()).unwrap();
        assert_abs_diff_eq!(a.b, b.b, epsilon = 1e-14);
        assert_abs_diff_eq!(a.gamma, b.gamma, epsilon = 1e-14);
        assert_abs_diff_eq!(b.delta, 0.0, epsilon = 1e-14);

        // σ_+(π/4) projective: β = γ = ±√2/4.
        let (sp, _) = sigma_pm(FRAC_PI_4);
        let proj = crate::povm::spectral_povm(&crate::povm::Observable::new(sp, &tol()).unwrap());
        let bp = BlochPovm::from_povm(&proj).unwrap();
        let sym = symmetrize_delta(&bp);
        let n = noise_quantities(&sym, &e, FRAC_PI_4, &tol()).unwrap();
        assert_abs_diff_eq!(n.delta, 0.0, epsilon = 1e-14);
        assert!(sym.to_povm(&tol()).is_ok());
    }

    #[test]
    fn optimal_family_examples() {
        let three = optimal_three_outcome(FRAC_PI_4, &tol()).unwrap();
        assert_eq!(three.len(), 3);
        assert!(crate::postproc::is_clean(&three, &tol()));
        let four = optimal_four_outcome(FRAC_PI_4, &tol()).unwrap();
        let id = Operator::identity(2);
        let expect = [
            (&id + &Operator::sigma_x()) * 0.25,
            (&id - &Operator::sigma_x()) * 0.25,
            (&id + &Operator::sigma_y()) * 0.25,
            (&id - &Operator::sigma_y()) * 0.25,
        ];
        for (a, b) in four.elements().iter().zip(&expect) {
            assert!((a - b).norm() < 1e-15);
        }
        let p = 1.0 / (1.0 + 3f64.sqrt());
        let b = optimal_four_outcome_bloch(std::f64::consts::FRAC_PI_3).unwrap();
        assert_abs_diff_eq!(b.coeffs[0][0], p / 2.0, epsilon = 1e-15);
        // Near π/2 the first element of the three-outcome family vanishes.
        let near = optimal_three_outcome_bloch(FRAC_PI_2 - 1e-9).unwrap();
        assert!(near.coeffs[0][0] < 1e-8);
        assert_eq!(optimal_three_outcome(FRAC_PI_2, &tol()).unwrap().len(), 2);
        assert!(optimal_four_outcome(2.0, &tol()).is_err());
    }

    #[test]
    fn sweep_reports_zero_gap() {
        let e = Ensemble::isotropic_six_state();
        let thetas: Vec<f64> = (1..=17).map(|k| k as f64 * FRAC_PI_2 / 18.0).collect();
        for family in [Family::Three, Family::Four] {
            let rows = sweep(&thetas, family, &e, &tol()).unwrap();
            assert_eq!(rows.len(), 17);
            for (row, &t) in rows.iter().zip(&thetas) {
                assert_eq!(row.theta, t);
                assert!(row.gap.abs() < 1e-9, "{family:?} θ={t}: gap {}", row.gap);
                assert!(family.bloch(t).unwrap().constraint_residual() < 1e-12);
            }
        }
    }
}

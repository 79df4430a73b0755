//! Seedable random generators for operators, states, POVMs and ensembles.
//! Used by property tests, the acceptance suite and fixture searches.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::hs::{Operator, C64};
use crate::povm::Povm;
use crate::processing::{Ensemble, WeightedState};
use crate::tol::Tolerances;

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Complex Ginibre matrix with standard normal entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| C64::new(normal(rng), normal(rng)))
}

/// Self-adjoint operator with Gaussian entries.
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Operator {
    let g = ginibre(d, d, rng);
    Operator::from_matrix((&g + g.adjoint()) * C64::new(0.5, 0.0)).expect("square finite")
}

/// Haar-distributed unitary (QR of a Ginibre matrix with phase fix).
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<C64> {
    let qr = ginibre(d, d, rng).qr();
    let (mut q, r) = qr.unpack();
    for k in 0..d {
        let rk = r[(k, k)];
        let phase = if rk.norm() > 0.0 { rk / rk.norm() } else { C64::new(1.0, 0.0) };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

/// Density matrix `G G† / Tr[G G†]` with `G` of shape `d × rank`.
pub fn random_state<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> Operator {
    let g = ginibre(d, rank.max(1), rng);
    let m = &g * g.adjoint();
    let tr = m.trace();
    Operator::from_matrix(m / tr).expect("square finite").hermitian_part()
}

/// Full-rank random density matrix.
pub fn random_mixed_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Operator {
    random_state(d, d, rng)
}

/// Observable `U diag(x) U†` with the given eigenvalues.
pub fn random_observable_with_spectrum<R: Rng + ?Sized>(eigenvalues: &[f64], rng: &mut R) -> Operator {
    let d = eigenvalues.len();
    let u = random_unitary(d, rng);
    let diag = DMatrix::from_fn(d, d, |i, j| if i == j { C64::new(eigenvalues[i], 0.0) } else { C64::new(0.0, 0.0) });
    Operator::from_matrix(&u * diag * u.adjoint()).expect("square finite").hermitian_part()
}

/// `S^{-1/2} A_i S^{-1/2}` normalisation with `S = sum_i A_i`.
fn normalise(seeds: Vec<DMatrix<C64>>, tol: &Tolerances) -> Povm {
    let d = seeds[0].nrows();
    let s = seeds.iter().fold(DMatrix::<C64>::zeros(d, d), |acc, a| acc + a);
    let s = (&s + s.adjoint()) * C64::new(0.5, 0.0);
    let eig = s.symmetric_eigen();
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| C64::new(1.0 / v.sqrt(), 0.0)));
    let t = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.adjoint();
    let elements = seeds
        .iter()
        .map(|a| Operator::from_matrix(&t * a * &t).expect("square finite").hermitian_part())
        .collect();
    Povm::new(elements, tol).expect("normalised seeds form a POVM")
}

/// POVM with `n` elements of rank `rank`; the rank is raised to
/// `ceil(d / n)` when needed so the elements can sum to the identity.
pub fn random_povm_with_rank<R: Rng + ?Sized>(d: usize, n: usize, rank: usize, rng: &mut R) -> Povm {
    let rank = rank.max(d.div_ceil(n.max(1))).min(d);
    let seeds = (0..n)
        .map(|_| {
            let g = ginibre(d, rank, rng);
            &g * g.adjoint()
        })
        .collect();
    normalise(seeds, &Tolerances::default())
}

pub fn random_povm<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> Povm {
    random_povm_with_rank(d, n, d, rng)
}

/// Rank-one qubit POVM whose Bloch vectors lie in the x-y plane, so its
/// span is `{I, σ_x, σ_y}` for `n >= 3` generic directions.
pub fn random_xy_rank_one_povm<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Povm {
    let seeds = (0..n)
        .map(|_| {
            let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let w: f64 = rng.random_range(0.2..1.0);
            let b = Operator::bloch(0.5, 0.5 * phi.cos(), 0.5 * phi.sin(), 0.0);
            b.into_matrix() * C64::new(w, 0.0)
        })
        .collect();
    normalise(seeds, &Tolerances::default())
}

/// `k` random mixed states with Dirichlet-like weights.
pub fn random_ensemble<R: Rng + ?Sized>(d: usize, k: usize, rng: &mut R) -> Ensemble {
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let states = raw
        .iter()
        .map(|w| WeightedState { q: w / total, rho: random_mixed_state(d, rng) })
        .collect();
    Ensemble::new(states, &Tolerances::default()).expect("valid random ensemble")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_produce_valid_objects() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let tol = Tolerances::default();
        for d in 2..5 {
            let u = random_unitary(d, &mut rng);
            assert!((&u * u.adjoint() - DMatrix::<C64>::identity(d, d)).norm() < 1e-12);
            let rho = random_mixed_state(d, &mut rng);
            assert!(crate::processing::validate_state(&rho, &tol).is_ok());
            let p = random_povm(d, d + 2, &mut rng);
            assert_eq!(p.len(), d + 2);
            let r1 = random_povm_with_rank(d, 2 * d, 1, &mut rng);
            assert!(crate::postproc::is_clean(&r1, &tol));
        }
        let xy = random_xy_rank_one_povm(5, &mut rng);
        for e in xy.elements() {
            assert!((e * &Operator::sigma_z()).trace().norm() < 1e-12);
        }
        assert!(crate::postproc::is_clean(&xy, &tol));
        assert_eq!(xy.span_dim(&tol), 3);
    }
}

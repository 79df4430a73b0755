//! AB-spaces: the operator span of the independent powers of two
//! observables, recovery of spectral probabilities from moments, and the
//! AB-informational-completeness predicates.

use log::warn;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hs::{swap_matrix, vectorize, HsVector, Operator, SubspaceProjector, C64};
use crate::povm::{Observable, Povm};
use crate::tol::Tolerances;

/// Relative norm below which a Gram-Schmidt remainder counts as dependent.
pub const DEPENDENCE_THRESHOLD: f64 = 1e-8;

/// Vandermonde systems larger than this trigger a conditioning warning.
pub const VANDERMONDE_WARN_SIZE: usize = 12;

/// Condition numbers above this make the recovery fail.
pub const VANDERMONDE_MAX_CONDITION: f64 = 1e12;

/// `{X^0 = I, X, ..., X^(s-1)}` with `s` the clustered spectrum size.
pub fn independent_powers(x: &Observable) -> Vec<Operator> {
    let mut out = Vec::with_capacity(x.spectrum_size());
    let mut current = Operator::identity(x.dim());
    for _ in 0..x.spectrum_size() {
        let next = &current * x.operator();
        out.push(current);
        current = next;
    }
    out
}

/// Inverse Vandermonde matrix `W` with `X_h = sum_j W[j][h] X^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct VandermondeRecovery {
    pub eigenvalues: Vec<f64>,
    pub w: DMatrix<f64>,
    /// 2-norm condition number of the power-value matrix `V_jk = x_k^j`.
    pub condition: f64,
}

impl VandermondeRecovery {
    pub fn size(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `max_{h,k} |sum_j W_jh x_k^j - δ_hk|`.
    pub fn inversion_residual(&self) -> f64 {
        let v = power_values(&self.eigenvalues);
        let prod = self.w.transpose() * v;
        let s = self.size();
        (prod - DMatrix::identity(s, s)).amax()
    }

    /// Spectral probabilities `p_h = sum_j W_jh m_j` from the moments
    /// `m_j = Tr[rho X^j]`, `j = 0..s`.
    pub fn probabilities(&self, moments: &[f64]) -> Result<Vec<f64>> {
        if moments.len() != self.size() {
            return Err(Error::LengthMismatch { expected: self.size(), found: moments.len() });
        }
        let m = DVector::from_column_slice(moments);
        Ok((self.w.transpose() * m).iter().copied().collect())
    }

    /// Spectral projectors rebuilt from the independent powers.
    pub fn projectors(&self, powers: &[Operator]) -> Result<Vec<Operator>> {
        if powers.len() != self.size() {
            return Err(Error::LengthMismatch { expected: self.size(), found: powers.len() });
        }
        let d = powers[0].dim();
        Ok((0..self.size())
            .map(|h| {
                powers
                    .iter()
                    .enumerate()
                    .fold(Operator::zeros(d), |acc, (j, xj)| &acc + &(xj * self.w[(j, h)]))
            })
            .collect())
    }
}

fn power_values(x: &[f64]) -> DMatrix<f64> {
    let s = x.len();
    DMatrix::from_fn(s, s, |j, k| x[k].powi(j as i32))
}

/// Moments `Tr[rho X^j]` for `j = 0..s`.
pub fn moments(x: &Observable, rho: &Operator) -> Vec<f64> {
    independent_powers(x).iter().map(|p| p.expectation(rho).re).collect()
}

/// Solves `W^T V = I` by LU with partial pivoting.
pub fn vandermonde_recovery(x: &Observable) -> Result<VandermondeRecovery> {
    let eigenvalues = x.eigenvalues().to_vec();
    let s = eigenvalues.len();
    if s > VANDERMONDE_WARN_SIZE {
        warn!("Vandermonde system of size {s} is likely ill-conditioned");
    }
    let v = power_values(&eigenvalues);
    let sv = crate::hs::svd(&v).singular_values;
    let s_min = if sv.len() == v.nrows() { sv[sv.len() - 1] } else { 0.0 };
    let condition = if s_min > 0.0 { sv[0] / s_min } else { f64::INFINITY };
    if condition.is_nan() || condition > VANDERMONDE_MAX_CONDITION {
        return Err(Error::IllConditioned(condition));
    }
    // W^T V = I  <=>  V^T W = I.
    let w = v
        .transpose()
        .lu()
        .solve(&DMatrix::identity(s, s))
        .ok_or(Error::IllConditioned(condition))?;
    Ok(VandermondeRecovery { eigenvalues, w, condition })
}

/// The span of the independent powers of `A` and `B`, with an orthonormal
/// basis and its projector.
#[derive(Clone, Debug, PartialEq)]
pub struct AbSpace {
    a: Observable,
    b: Observable,
    basis: Vec<Operator>,
    projector: SubspaceProjector,
}

#[derive(Serialize, Deserialize)]
pub struct AbSpaceJson {
    #[serde(rename = "A")]
    pub a: Operator,
    #[serde(rename = "B")]
    pub b: Operator,
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub basis: Option<Vec<Operator>>,
}

impl AbSpaceJson {
    /// Rebuilds the space from its generators; a stored `dim` must agree.
    pub fn into_space(self, tol: &Tolerances) -> Result<AbSpace> {
        let space = ab_space(&Observable::new(self.a, tol)?, &Observable::new(self.b, tol)?, tol)?;
        if let Some(dim) = self.dim {
            if dim != space.span_dim() {
                return Err(Error::LengthMismatch { expected: dim, found: space.span_dim() });
            }
        }
        Ok(space)
    }
}

impl From<&AbSpace> for AbSpaceJson {
    fn from(s: &AbSpace) -> Self {
        AbSpaceJson {
            a: s.a.operator().clone(),
            b: s.b.operator().clone(),
            dim: Some(s.span_dim()),
            basis: Some(s.basis.clone()),
        }
    }
}

impl AbSpace {
    pub fn generators(&self) -> (&Observable, &Observable) {
        (&self.a, &self.b)
    }

    pub fn basis(&self) -> &[Operator] {
        &self.basis
    }

    pub fn projector(&self) -> &SubspaceProjector {
        &self.projector
    }

    pub fn span_dim(&self) -> usize {
        self.basis.len()
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// `||E Π* E - Π||` with `E` the swap on `H ⊗ H`.
    pub fn transpose_symmetry_residual(&self) -> f64 {
        let e = swap_matrix(self.dim());
        let pi = self.projector.matrix();
        (&e * pi.conjugate() * &e - pi).norm()
    }
}

/// Modified Gram-Schmidt with one re-orthogonalization pass; remainders
/// smaller than `DEPENDENCE_THRESHOLD` times the input norm are dropped.
fn orthonormalize(ops: &[Operator]) -> Vec<HsVector> {
    let mut basis: Vec<DVector<C64>> = Vec::new();
    let d = ops.first().map_or(0, Operator::dim);
    for op in ops {
        let original = vectorize(op).entries().clone();
        let scale = original.norm();
        if scale == 0.0 {
            continue;
        }
        let mut v = original;
        for _ in 0..2 {
            for e in &basis {
                let c = e.dotc(&v);
                v -= e * c;
            }
        }
        let n = v.norm();
        if n > DEPENDENCE_THRESHOLD * scale {
            basis.push(v / C64::new(n, 0.0));
        }
    }
    basis
        .into_iter()
        .map(|v| HsVector::from_entries(d, v).expect("length d^2"))
        .collect()
}

/// Builds `S_AB`: identity first, then `A` powers, then `B` powers.
pub fn ab_space(a: &Observable, b: &Observable, _tol: &Tolerances) -> Result<AbSpace> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    let d = a.dim();
    let mut gens = vec![Operator::identity(d)];
    gens.extend(independent_powers(a).into_iter().skip(1));
    gens.extend(independent_powers(b).into_iter().skip(1));
    let vectors = orthonormalize(&gens);
    let projector = SubspaceProjector::from_orthonormal(d, &vectors);
    let basis = vectors
        .iter()
        .map(|v| crate::hs::devectorize(v).hermitian_part())
        .collect();
    Ok(AbSpace { a: a.clone(), b: b.clone(), basis, projector })
}

fn check_space_dim(p: &Povm, s: &AbSpace) -> Result<()> {
    if p.dim() != s.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), found: p.dim() });
    }
    Ok(())
}

/// `||Π_AB Π_P - Π_AB||`.
pub fn ab_infocomplete_residual(p: &Povm, s: &AbSpace, tol: &Tolerances) -> Result<f64> {
    check_space_dim(p, s)?;
    let pi_p = p.span_projector(tol);
    let pi_ab = s.projector.matrix();
    Ok((pi_ab * pi_p.matrix() - pi_ab).norm())
}

/// `||Π_P - Π_AB||`.
pub fn minimality_residual(p: &Povm, s: &AbSpace, tol: &Tolerances) -> Result<f64> {
    check_space_dim(p, s)?;
    let pi_p = p.span_projector(tol);
    Ok((pi_p.matrix() - s.projector.matrix()).norm())
}

pub fn is_ab_infocomplete(p: &Povm, s: &AbSpace, tol: &Tolerances) -> Result<bool> {
    Ok(ab_infocomplete_residual(p, s, tol)? <= tol.lin_solve)
}

pub fn is_minimal_ab_infocomplete(p: &Povm, s: &AbSpace, tol: &Tolerances) -> Result<bool> {
    Ok(minimality_residual(p, s, tol)? <= tol.lin_solve)
}

/// Summary reported by `abspace check`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbVerdict {
    pub ab_infocomplete: bool,
    pub minimal: bool,
    /// Dimension of `Span(P)`.
    pub span_dim: usize,
    pub ab_dim: usize,
}

pub fn ab_verdict(p: &Povm, s: &AbSpace, tol: &Tolerances) -> Result<AbVerdict> {
    Ok(AbVerdict {
        ab_infocomplete: is_ab_infocomplete(p, s, tol)?,
        minimal: is_minimal_ab_infocomplete(p, s, tol)?,
        span_dim: p.span_dim(tol),
        ab_dim: s.span_dim(),
    })
}

/// Projection of each element onto `S_AB`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Lemma1Outcome {
    /// All projected elements are positive and form a minimal
    /// AB-infocomplete POVM.
    Projected { povm: Povm },
    /// Projected elements that lost positivity, with their lowest eigenvalue.
    NotPositive { violations: Vec<(usize, f64)>, projected: Vec<Operator> },
}

pub fn lemma1_projection(p: &Povm, s: &AbSpace, tol: &Tolerances) -> Result<Lemma1Outcome> {
    let residual = ab_infocomplete_residual(p, s, tol)?;
    if residual > tol.lin_solve {
        return Err(Error::NotAbInfocomplete(residual));
    }
    let projected: Vec<Operator> = p
        .elements()
        .iter()
        .map(|e| s.projector.project(e).hermitian_part())
        .collect();
    let violations: Vec<(usize, f64)> = projected
        .iter()
        .enumerate()
        .map(|(i, q)| (i, q.min_eigenvalue()))
        .filter(|&(_, m)| m < -tol.psd_slack)
        .collect();
    if !violations.is_empty() {
        return Ok(Lemma1Outcome::NotPositive { violations, projected });
    }
    let labels = p.labels().map(<[String]>::to_vec);
    Ok(Lemma1Outcome::Projected { povm: Povm::with_labels(projected, labels, tol)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::povm::spectral_povm;
    use approx::assert_abs_diff_eq;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn obs(x: Operator) -> Observable {
        Observable::new(x, &tol()).unwrap()
    }

    fn gram_rank(ops: &[Operator]) -> usize {
        crate::hs::numerical_rank(&crate::hs::synthesis_matrix(ops).unwrap(), 1e-10)
    }

    #[test]
    fn independent_powers_examples() {
        let p = independent_powers(&obs(Operator::sigma_z()));
        assert_eq!(p.len(), 2);
        assert_eq!(p[0], Operator::identity(2));
        assert_eq!(p[1], Operator::sigma_z());
        assert_eq!(independent_powers(&obs(Operator::identity(2))).len(), 1);

        let x = obs(Operator::diag(&[1.0, 2.0, 3.0]));
        let p = independent_powers(&x);
        assert_eq!(p.len(), 3);
        assert_eq!(gram_rank(&p), 3);
        // X^3 solves the least-squares system in {I, X, X^2} exactly.
        let lam = crate::hs::synthesis_matrix(&p).unwrap();
        let target = vectorize(&x.operator().powi(3)).entries().clone();
        let coeffs = crate::hs::moore_penrose(&lam) * &target;
        assert!((&lam * coeffs - target).norm() < 1e-10);
    }

    #[test]
    fn vandermonde_examples() {
        let r = vandermonde_recovery(&obs(Operator::sigma_z())).unwrap();
        // Eigenvalues are ordered (-1, 1): columns follow that order.
        assert_eq!(r.eigenvalues, vec![-1.0, 1.0]);
        let expect = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, -0.5, 0.5]);
        assert!((&r.w - expect).amax() < 1e-15);

        let r = vandermonde_recovery(&obs(Operator::identity(2))).unwrap();
        assert_eq!(r.w, DMatrix::from_element(1, 1, 1.0));

        let x = obs(Operator::diag(&[0.0, 1.0, 2.0]));
        let r = vandermonde_recovery(&x).unwrap();
        assert!(r.inversion_residual() < 1e-12);
        let rebuilt = r.projectors(&independent_powers(&x)).unwrap();
        for (a, b) in rebuilt.iter().zip(x.projectors()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn ab_space_examples() {
        let s = ab_space(&obs(Operator::sigma_x()), &obs(Operator::sigma_y()), &tol()).unwrap();
        assert_eq!(s.span_dim(), 3);
        assert!(s.projector().residual(&Operator::sigma_z()) > 0.9);
        assert!(s.transpose_symmetry_residual() < 1e-10);
        let zz = ab_space(&obs(Operator::sigma_z()), &obs(Operator::sigma_z()), &tol()).unwrap();
        assert_eq!(zz.span_dim(), 2);
        let zx = ab_space(&obs(Operator::sigma_z()), &obs(Operator::sigma_x()), &tol()).unwrap();
        assert_eq!(zx.span_dim(), 3);
        assert!(zx.projector().residual(&Operator::sigma_y()) > 0.9);
        assert!(ab_space(&obs(Operator::sigma_z()), &obs(Operator::identity(3)), &tol()).is_err());
    }

    #[test]
    fn infocomplete_examples() {
        let s = ab_space(&obs(Operator::sigma_x()), &obs(Operator::sigma_y()), &tol()).unwrap();
        let x = spectral_povm(&obs(Operator::sigma_x()));
        let y = spectral_povm(&obs(Operator::sigma_y()));
        let union = crate::postproc::convex_union(&x, &y, 0.5, &tol()).unwrap();
        assert!(is_ab_infocomplete(&union, &s, &tol()).unwrap());
        assert!(is_minimal_ab_infocomplete(&union, &s, &tol()).unwrap());
        assert!(!is_ab_infocomplete(&Povm::sigma_z_projective(), &s, &tol()).unwrap());
        assert!(is_ab_infocomplete(&Povm::qubit_sic(), &s, &tol()).unwrap());
        assert!(!is_minimal_ab_infocomplete(&Povm::qubit_sic(), &s, &tol()).unwrap());
        assert!(!is_minimal_ab_infocomplete(&x, &s, &tol()).unwrap());
        let v = ab_verdict(&Povm::qubit_sic(), &s, &tol()).unwrap();
        assert_eq!((v.span_dim, v.ab_dim), (4, 3));
    }

    #[test]
    fn lemma1_on_qubit_sic_drops_sigma_z() {
        let s = ab_space(&obs(Operator::sigma_x()), &obs(Operator::sigma_y()), &tol()).unwrap();
        let sic = Povm::qubit_sic();
        match lemma1_projection(&sic, &s, &tol()).unwrap() {
            Lemma1Outcome::Projected { povm } => {
                for (q, p) in povm.elements().iter().zip(sic.elements()) {
                    assert_abs_diff_eq!((q * &Operator::sigma_z()).trace().re, 0.0, epsilon = 1e-12);
                    let drop_z = p - &(Operator::sigma_z() * ((p * &Operator::sigma_z()).trace().re / 2.0));
                    assert!((q - &drop_z).norm() < 1e-12);
                }
                assert!(is_minimal_ab_infocomplete(&povm, &s, &tol()).unwrap());
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            lemma1_projection(&Povm::sigma_z_projective(), &s, &tol()),
            Err(Error::NotAbInfocomplete(_))
        ));
    }
}

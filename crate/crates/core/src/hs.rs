//! Hilbert-Schmidt operator algebra.
//!
//! Operators on a `d`-dimensional Hilbert space are stored as dense complex
//! matrices. The vectorization `|X> = sum_mn X_mn |m>|n>` uses row-major
//! ordering (index `m * d + n`) everywhere in the crate, so that
//! `(A ⊗ B)|X> = |A X B^T>` and `<X|Y> = Tr[X^† Y]`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{ComplexField, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol::Tolerances;

pub type C64 = Complex64;

const I: C64 = C64::new(0.0, 1.0);

/// A linear operator on a finite-dimensional Hilbert space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OperatorJson", into = "OperatorJson")]
pub struct Operator {
    mat: DMatrix<C64>,
}

#[derive(Serialize, Deserialize)]
struct OperatorJson {
    dim: usize,
    re: Vec<Vec<f64>>,
    #[serde(default)]
    im: Vec<Vec<f64>>,
}

impl TryFrom<OperatorJson> for Operator {
    type Error = Error;

    fn try_from(j: OperatorJson) -> Result<Self> {
        let d = j.dim;
        if d == 0 {
            return Err(Error::Empty);
        }
        let check = |rows: &Vec<Vec<f64>>| -> Result<()> {
            if rows.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: rows.len() });
            }
            for r in rows {
                if r.len() != d {
                    return Err(Error::DimensionMismatch { expected: d, found: r.len() });
                }
            }
            Ok(())
        };
        check(&j.re)?;
        if !j.im.is_empty() {
            check(&j.im)?;
        }
        let mat = DMatrix::from_fn(d, d, |m, n| {
            let im = if j.im.is_empty() { 0.0 } else { j.im[m][n] };
            C64::new(j.re[m][n], im)
        });
        Operator::from_matrix(mat)
    }
}

impl From<Operator> for OperatorJson {
    fn from(op: Operator) -> Self {
        let d = op.dim();
        let re = (0..d).map(|m| (0..d).map(|n| op.mat[(m, n)].re).collect()).collect();
        let im = (0..d).map(|m| (0..d).map(|n| op.mat[(m, n)].im).collect()).collect();
        OperatorJson { dim: d, re, im }
    }
}

impl Operator {
    pub fn from_matrix(mat: DMatrix<C64>) -> Result<Self> {
        if mat.nrows() == 0 {
            return Err(Error::Empty);
        }
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch { expected: mat.nrows(), found: mat.ncols() });
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { mat })
    }

    /// Builds an operator from row-major real entries.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let d = rows.len();
        for r in rows {
            if r.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: r.len() });
            }
        }
        Self::from_matrix(DMatrix::from_fn(d, d, |m, n| C64::new(rows[m][n], 0.0)))
    }

    pub fn zeros(d: usize) -> Self {
        Self { mat: DMatrix::zeros(d, d) }
    }

    pub fn identity(d: usize) -> Self {
        Self { mat: DMatrix::identity(d, d) }
    }

    pub fn diag(values: &[f64]) -> Self {
        let d = values.len();
        Self { mat: DMatrix::from_fn(d, d, |m, n| if m == n { C64::new(values[m], 0.0) } else { C64::new(0.0, 0.0) }) }
    }

    /// `|k><k|` in dimension `d`.
    pub fn basis_projector(d: usize, k: usize) -> Self {
        let mut mat = DMatrix::zeros(d, d);
        mat[(k, k)] = C64::new(1.0, 0.0);
        Self { mat }
    }

    /// `|psi><psi|` for an (unnormalized) vector.
    pub fn ket_bra(psi: &DVector<C64>) -> Self {
        Self { mat: psi * psi.adjoint() }
    }

    pub fn sigma_x() -> Self {
        Self { mat: DMatrix::from_row_slice(2, 2, &[0.0.into(), 1.0.into(), 1.0.into(), 0.0.into()]) }
    }

    pub fn sigma_y() -> Self {
        Self { mat: DMatrix::from_row_slice(2, 2, &[0.0.into(), -I, I, 0.0.into()]) }
    }

    pub fn sigma_z() -> Self {
        Self { mat: DMatrix::from_row_slice(2, 2, &[1.0.into(), 0.0.into(), 0.0.into(), (-1.0).into()]) }
    }

    /// `a I + b σx + c σy + e σz`.
    pub fn bloch(a: f64, b: f64, c: f64, e: f64) -> Self {
        Self::identity(2) * a + Self::sigma_x() * b + Self::sigma_y() * c + Self::sigma_z() * e
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn adjoint(&self) -> Self {
        Self { mat: self.mat.adjoint() }
    }

    pub fn transpose(&self) -> Self {
        Self { mat: self.mat.transpose() }
    }

    pub fn conj(&self) -> Self {
        Self { mat: self.mat.conjugate() }
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    /// Frobenius (Hilbert-Schmidt) norm.
    pub fn norm(&self) -> f64 {
        self.mat.norm()
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { mat: &self.mat * c }
    }

    /// `(X + X^†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self { mat: (&self.mat + self.mat.adjoint()) * C64::new(0.5, 0.0) }
    }

    /// `||X - X^†||_F`.
    pub fn self_adjoint_deviation(&self) -> f64 {
        (&self.mat - self.mat.adjoint()).norm()
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        self.self_adjoint_deviation() <= tol * self.norm().max(1.0)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        Self { mat: &self.mat * &other.mat - &other.mat * &self.mat }
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut out = Self::identity(self.dim());
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Born-rule expectation `Tr[rho X]`.
    pub fn expectation(&self, rho: &Operator) -> C64 {
        (&rho.mat * &self.mat).trace()
    }

    /// Eigen-decomposition of the Hermitian part, eigenvalues ascending.
    pub fn eigh(&self) -> (Vec<f64>, DMatrix<C64>) {
        let eig = SymmetricEigen::new(self.hermitian_part().mat);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(self.dim(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
        (values, vectors)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigh().0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub(crate) fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn add(self, rhs: &'a Operator) -> Operator {
        Operator { mat: &self.mat + &rhs.mat }
    }
}

impl Add for Operator {
    type Output = Operator;
    fn add(self, rhs: Operator) -> Operator {
        Operator { mat: self.mat + rhs.mat }
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn sub(self, rhs: &'a Operator) -> Operator {
        Operator { mat: &self.mat - &rhs.mat }
    }
}

impl Sub for Operator {
    type Output = Operator;
    fn sub(self, rhs: Operator) -> Operator {
        Operator { mat: self.mat - rhs.mat }
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn mul(self, rhs: &'a Operator) -> Operator {
        Operator { mat: &self.mat * &rhs.mat }
    }
}

impl Mul<f64> for Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        Operator { mat: self.mat * C64::new(rhs, 0.0) }
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        Operator { mat: &self.mat * C64::new(rhs, 0.0) }
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: C64) -> Operator {
        Operator { mat: &self.mat * rhs }
    }
}

impl Neg for Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator { mat: -self.mat }
    }
}

/// Sum of a non-empty list of operators; `None` on an empty slice.
pub fn sum<'a>(ops: impl IntoIterator<Item = &'a Operator>) -> Option<Operator> {
    let mut it = ops.into_iter();
    let first = it.next()?.clone();
    Some(it.fold(first, |acc, op| &acc + op))
}

/// The vector `|X>` in the d²-dimensional Hilbert-Schmidt space.
#[derive(Clone, Debug, PartialEq)]
pub struct HsVector {
    dim: usize,
    entries: DVector<C64>,
}

impl HsVector {
    pub fn from_entries(dim: usize, entries: DVector<C64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::LengthMismatch { expected: dim * dim, found: entries.len() });
        }
        Ok(Self { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &DVector<C64> {
        &self.entries
    }

    pub fn dot(&self, other: &Self) -> C64 {
        self.entries.dotc(&other.entries)
    }
}

pub fn vectorize(x: &Operator) -> HsVector {
    let d = x.dim();
    let entries = DVector::from_fn(d * d, |k, _| x.mat[(k / d, k % d)]);
    HsVector { dim: d, entries }
}

pub fn devectorize(v: &HsVector) -> Operator {
    let d = v.dim;
    Operator { mat: DMatrix::from_fn(d, d, |m, n| v.entries[m * d + n]) }
}

/// Reshapes a raw d²-vector produced by linear algebra into an operator.
pub(crate) fn devectorize_raw(d: usize, v: &DVector<C64>) -> Operator {
    Operator { mat: DMatrix::from_fn(d, d, |m, n| v[m * d + n]) }
}

/// `<X|Y> = Tr[X^† Y]`.
pub fn hs_inner(x: &Operator, y: &Operator) -> Result<C64> {
    x.check_dim(y)?;
    Ok(x.mat.zip_fold(&y.mat, C64::new(0.0, 0.0), |acc, a, b| acc + a.conj() * b))
}

/// `E|X> = |X^T>`.
pub fn swap_transpose(x: &Operator) -> Operator {
    x.transpose()
}

/// The swap operator `E` on the d²-dimensional space.
pub fn swap_matrix(d: usize) -> DMatrix<C64> {
    let mut e = DMatrix::zeros(d * d, d * d);
    for m in 0..d {
        for n in 0..d {
            e[(n * d + m, m * d + n)] = C64::new(1.0, 0.0);
        }
    }
    e
}

/// `(A ⊗ B)|X> = |A X B^T>`.
pub fn kron_action(a: &Operator, b: &Operator, x: &Operator) -> Result<Operator> {
    a.check_dim(b)?;
    a.check_dim(x)?;
    Ok(Operator { mat: &a.mat * &x.mat * b.mat.transpose() })
}

/// Dense Kronecker product `A ⊗ B` in the row-major vectorization basis.
pub fn kron(a: &Operator, b: &Operator) -> DMatrix<C64> {
    a.mat.kronecker(&b.mat)
}

/// Positivity test on a self-adjoint operator.
pub fn is_psd(x: &Operator, tol: &Tolerances) -> Result<bool> {
    if !x.is_self_adjoint(tol.lin_solve) {
        return Err(Error::NotSelfAdjoint(x.self_adjoint_deviation()));
    }
    Ok(x.min_eigenvalue() >= -tol.psd_slack)
}

/// Nonzero part of a singular value decomposition `M = U diag(s) V†`.
///
/// Computed from the Hermitian eigendecomposition of `[[0, M], [M†, 0]]`,
/// whose positive eigenvalues are the singular values of `M` with
/// eigenvectors `(u; v) / √2`. The bidiagonal SVD in nalgebra can lose
/// accuracy on rank-deficient input, the symmetric eigensolver does not.
#[derive(Clone, Debug)]
pub struct Svd<T: ComplexField<RealField = f64>> {
    /// Left singular vectors as columns, `rows × k`.
    pub u: DMatrix<T>,
    /// Positive singular values in decreasing order.
    pub singular_values: Vec<f64>,
    /// Right singular vectors as columns, `cols × k`.
    pub v: DMatrix<T>,
}

impl<T: ComplexField<RealField = f64>> Svd<T> {
    pub fn max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// Indices of singular values strictly above `cutoff`.
    pub fn above(&self, cutoff: f64) -> usize {
        self.singular_values.iter().take_while(|&&s| s > cutoff).count()
    }
}

/// Singular triplets of `m` with positive singular value.
pub fn svd<T>(m: &DMatrix<T>) -> Svd<T>
where
    T: ComplexField<RealField = f64>,
{
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Svd { u: DMatrix::zeros(r, 0), singular_values: Vec::new(), v: DMatrix::zeros(c, 0) };
    }
    let mut h = DMatrix::<T>::zeros(r + c, r + c);
    h.view_mut((0, r), (r, c)).copy_from(m);
    h.view_mut((r, 0), (c, r)).copy_from(&m.adjoint());
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..r + c).filter(|&k| eig.eigenvalues[k] > 0.0).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    order.truncate(r.min(c));
    let k = order.len();
    let scale = T::from_real(std::f64::consts::SQRT_2);
    let u = DMatrix::from_fn(r, k, |i, j| eig.eigenvectors[(i, order[j])].clone() * scale.clone());
    let v = DMatrix::from_fn(c, k, |i, j| eig.eigenvectors[(r + i, order[j])].clone() * scale.clone());
    let singular_values = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    Svd { u, singular_values, v }
}

/// Moore-Penrose inverse with the default relative cutoff of [`Tolerances`].
pub fn moore_penrose<T>(m: &DMatrix<T>) -> DMatrix<T>
where
    T: ComplexField<RealField = f64>,
{
    moore_penrose_with(m, Tolerances::default().eig_zero)
}

/// Moore-Penrose inverse; singular values below `rel_cutoff * s_max` are
/// treated as zero.
pub fn moore_penrose_with<T>(m: &DMatrix<T>, rel_cutoff: f64) -> DMatrix<T>
where
    T: ComplexField<RealField = f64>,
{
    let d = svd(m);
    pinv_from(&d, m.shape(), rel_cutoff * d.max())
}

/// Moore-Penrose inverse discarding singular values at or below `cutoff`.
pub fn moore_penrose_abs<T>(m: &DMatrix<T>, cutoff: f64) -> DMatrix<T>
where
    T: ComplexField<RealField = f64>,
{
    pinv_from(&svd(m), m.shape(), cutoff)
}

fn pinv_from<T>(d: &Svd<T>, (r, c): (usize, usize), cutoff: f64) -> DMatrix<T>
where
    T: ComplexField<RealField = f64>,
{
    let k = d.above(cutoff);
    let mut out = DMatrix::<T>::zeros(c, r);
    for j in 0..k {
        let inv = T::from_real(1.0 / d.singular_values[j]);
        out += d.v.column(j) * d.u.column(j).adjoint() * inv;
    }
    out
}

/// Numerical rank with the relative singular-value cutoff.
pub fn numerical_rank<T>(m: &DMatrix<T>, rel_cutoff: f64) -> usize
where
    T: ComplexField<RealField = f64>,
{
    let d = svd(m);
    d.above(rel_cutoff * d.max())
}

/// Orthogonal projector onto a subspace of the Hilbert-Schmidt space.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceProjector {
    dim: usize,
    rank: usize,
    matrix: DMatrix<C64>,
}

impl SubspaceProjector {
    /// Projector `sum_k |e_k><e_k|` for an orthonormal list.
    pub fn from_orthonormal(dim: usize, basis: &[HsVector]) -> Self {
        let mut matrix = DMatrix::zeros(dim * dim, dim * dim);
        for e in basis {
            matrix += &e.entries * e.entries.adjoint();
        }
        Self { dim, rank: basis.len(), matrix }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn project(&self, x: &Operator) -> Operator {
        devectorize_raw(self.dim, &(&self.matrix * vectorize(x).entries))
    }

    /// `||(1 - Π)|X>||`.
    pub fn residual(&self, x: &Operator) -> f64 {
        let v = vectorize(x).entries;
        (&v - &self.matrix * &v).norm()
    }

    pub fn idempotency_residual(&self) -> f64 {
        (&self.matrix * &self.matrix - &self.matrix).norm()
    }

    pub fn self_adjoint_residual(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).norm()
    }
}

/// Matrix whose columns are the vectorized operators (the synthesis map).
pub fn synthesis_matrix(ops: &[Operator]) -> Result<DMatrix<C64>> {
    let first = ops.first().ok_or(Error::Empty)?;
    let d = first.dim();
    let mut lam = DMatrix::zeros(d * d, ops.len());
    for (i, op) in ops.iter().enumerate() {
        first.check_dim(op)?;
        lam.set_column(i, &vectorize(op).entries);
    }
    Ok(lam)
}

/// Orthogonal projector onto `Span{|op>}`.
pub fn span_projector(ops: &[Operator], tol: &Tolerances) -> Result<SubspaceProjector> {
    let lam = synthesis_matrix(ops)?;
    let d = ops[0].dim();
    let dec = svd(&lam);
    let rank = dec.above(tol.eig_zero * dec.max());
    let u = dec.u.columns(0, rank);
    let matrix = u * u.adjoint();
    Ok(SubspaceProjector { dim: d, rank, matrix })
}

/// Orthonormal basis of the real vector space of d×d Hermitian matrices.
///
/// Ordering: diagonal units, then for each `m < n` the symmetric and the
/// antisymmetric off-diagonal generators.
pub fn hermitian_basis(d: usize) -> Vec<Operator> {
    let mut out = Vec::with_capacity(d * d);
    for k in 0..d {
        out.push(Operator::basis_projector(d, k));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for m in 0..d {
        for n in (m + 1)..d {
            let mut s = DMatrix::zeros(d, d);
            s[(m, n)] = C64::new(h, 0.0);
            s[(n, m)] = C64::new(h, 0.0);
            out.push(Operator { mat: s });
            let mut a = DMatrix::zeros(d, d);
            a[(m, n)] = C64::new(0.0, -h);
            a[(n, m)] = C64::new(0.0, h);
            out.push(Operator { mat: a });
        }
    }
    out
}

/// Real coordinates `Tr[B_k X]` of the Hermitian part of `X` in
/// [`hermitian_basis`].
pub fn hermitian_coords(x: &Operator) -> Vec<f64> {
    let d = x.dim();
    let h = std::f64::consts::SQRT_2;
    let mut out = Vec::with_capacity(d * d);
    for k in 0..d {
        out.push(x.mat[(k, k)].re);
    }
    for m in 0..d {
        for n in (m + 1)..d {
            let upper = x.mat[(m, n)];
            let lower = x.mat[(n, m)];
            // Re and Im parts of the Hermitian part's (m, n) entry.
            out.push(h * 0.5 * (upper.re + lower.re));
            out.push(h * 0.5 * (lower.im - upper.im));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn vectorize_examples() {
        let v = vectorize(&Operator::identity(2));
        assert_eq!(v.entries().as_slice(), &[c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)]);
        let v = vectorize(&Operator::sigma_x());
        assert_eq!(v.entries().as_slice(), &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        let v = vectorize(&Operator::sigma_y());
        assert_eq!(v.entries().as_slice(), &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]);
    }

    #[test]
    fn devectorize_roundtrip() {
        let x = Operator::from_matrix(DMatrix::from_fn(3, 3, |m, n| c(m as f64, n as f64 - 0.5))).unwrap();
        assert_eq!(devectorize(&vectorize(&x)), x);
    }

    #[test]
    fn inner_product_examples() {
        let i2 = Operator::identity(2);
        assert_eq!(hs_inner(&i2, &i2).unwrap(), c(2., 0.));
        assert_eq!(hs_inner(&Operator::sigma_x(), &Operator::sigma_y()).unwrap(), c(0., 0.));
        for theta in [0.0, 0.3, 1.1, 2.5] {
            let sp = Operator::sigma_x() * f64::cos(theta) + Operator::sigma_y() * f64::sin(theta);
            assert_abs_diff_eq!(hs_inner(&sp, &sp).unwrap().re, 2.0, epsilon = 1e-14);
        }
        assert!(matches!(
            hs_inner(&i2, &Operator::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn swap_transpose_examples() {
        assert_eq!(swap_transpose(&Operator::sigma_y()), -Operator::sigma_y());
        assert_eq!(swap_transpose(&Operator::sigma_x()), Operator::sigma_x());
        let x = Operator::from_real_rows(&[&[0., 1.], &[0., 0.]]).unwrap();
        let t = Operator::from_real_rows(&[&[0., 0.], &[1., 0.]]).unwrap();
        assert_eq!(swap_transpose(&x), t);
        assert_eq!(swap_transpose(&swap_transpose(&x)), x);
        let e = swap_matrix(2);
        assert_eq!(&e * vectorize(&x).entries(), vectorize(&t).entries().clone());
    }

    #[test]
    fn kron_action_examples() {
        let i2 = Operator::identity(2);
        let x = Operator::from_real_rows(&[&[1., 2.], &[3., 4.]]).unwrap();
        assert_eq!(kron_action(&i2, &i2, &x).unwrap(), x);
        assert_eq!(kron_action(&Operator::sigma_x(), &Operator::sigma_x(), &i2).unwrap(), i2);
        let a = Operator::sigma_y() * 0.7 + Operator::sigma_z();
        let b = Operator::from_matrix(DMatrix::from_row_slice(2, 2, &[c(1., 2.), c(0., 1.), c(-1., 0.5), c(3., 0.)])).unwrap();
        let via_matrix = vectorize(&kron_action(&a, &b, &x).unwrap());
        let via_kron = kron(&a, &b) * vectorize(&x).entries();
        assert!((via_matrix.entries() - via_kron).norm() < 1e-12);
    }

    #[test]
    fn psd_examples() {
        let tol = Tolerances::default();
        assert!(is_psd(&(Operator::identity(2) * 0.5), &tol).unwrap());
        assert!(!is_psd(&Operator::sigma_z(), &tol).unwrap());
        assert!(is_psd(&((Operator::identity(2) + Operator::sigma_x()) * 0.5), &tol).unwrap());
        let bad = Operator::from_real_rows(&[&[0., 1.], &[0., 0.]]).unwrap();
        assert!(matches!(is_psd(&bad, &tol), Err(Error::NotSelfAdjoint(_))));
    }

    #[test]
    fn pseudoinverse_examples() {
        let id = DMatrix::<C64>::identity(3, 3);
        assert!((moore_penrose(&id) - &id).norm() < 1e-14);
        let d = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        let z = moore_penrose(&d);
        assert_abs_diff_eq!(z[(0, 0)], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(z[(1, 1)], 0.0);
        let zero = DMatrix::<C64>::zeros(2, 3);
        assert_eq!(moore_penrose(&zero).shape(), (3, 2));
    }

    #[test]
    fn span_projector_examples() {
        let tol = Tolerances::default();
        let paulis = [Operator::identity(2), Operator::sigma_x(), Operator::sigma_y(), Operator::sigma_z()];
        let p = span_projector(&paulis, &tol).unwrap();
        assert_eq!(p.rank(), 4);
        assert!((p.matrix() - DMatrix::<C64>::identity(4, 4)).norm() < 1e-12);

        let p = span_projector(&[Operator::identity(2)], &tol).unwrap();
        let v = vectorize(&Operator::identity(2)).entries().clone();
        let expect = &v * v.adjoint() * c(0.5, 0.);
        assert_eq!(p.rank(), 1);
        assert!((p.matrix() - expect).norm() < 1e-12);

        let up = (Operator::identity(2) + Operator::sigma_z()) * 0.5;
        let down = (Operator::identity(2) - Operator::sigma_z()) * 0.5;
        let p1 = span_projector(&[up, down], &tol).unwrap();
        let p2 = span_projector(&[Operator::identity(2), Operator::sigma_z()], &tol).unwrap();
        assert_eq!(p1.rank(), 2);
        assert!((p1.matrix() - p2.matrix()).norm() < 1e-12);
    }

    #[test]
    fn hermitian_coordinates_are_orthonormal_expansion() {
        let d = 3;
        let basis = hermitian_basis(d);
        assert_eq!(basis.len(), d * d);
        for (a, ba) in basis.iter().enumerate() {
            assert!(ba.is_self_adjoint(1e-15));
            for (b, bb) in basis.iter().enumerate() {
                let ip = hs_inner(ba, bb).unwrap();
                assert_abs_diff_eq!(ip.re, if a == b { 1.0 } else { 0.0 }, epsilon = 1e-14);
            }
        }
        let x = Operator::from_matrix(DMatrix::from_fn(3, 3, |m, n| c((m + 2 * n) as f64, m as f64 - n as f64))).unwrap();
        let x = x.hermitian_part();
        let coords = hermitian_coords(&x);
        for (k, b) in basis.iter().enumerate() {
            assert_abs_diff_eq!(coords[k], hs_inner(b, &x).unwrap().re, epsilon = 1e-12);
        }
    }
}

//! POVMs, their frame operator and dual frames, and the informational
//! completeness predicates.

use log::warn;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, PovmDefect, Result};
use crate::hs::{
    self, devectorize_raw, hs_inner, moore_penrose_with, numerical_rank, span_projector,
    synthesis_matrix, vectorize, Operator, SubspaceProjector, C64,
};
use crate::tol::Tolerances;

/// An ordered list of positive operators summing to the identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PovmJson")]
pub struct Povm {
    dim: usize,
    elements: Vec<Operator>,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

/// Serialized form; validated on conversion with default tolerances.
#[derive(Clone, Debug, Deserialize)]
pub struct PovmJson {
    pub dim: usize,
    pub elements: Vec<Operator>,
    #[serde(default)]
    pub labels: Option<Vec<String>>,
}

impl TryFrom<PovmJson> for Povm {
    type Error = Error;

    fn try_from(j: PovmJson) -> Result<Self> {
        j.into_povm(&Tolerances::default())
    }
}

impl PovmJson {
    pub fn into_povm(self, tol: &Tolerances) -> Result<Povm> {
        for e in &self.elements {
            if e.dim() != self.dim {
                return Err(Error::DimensionMismatch { expected: self.dim, found: e.dim() });
            }
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.elements.len() {
                return Err(Error::LengthMismatch { expected: self.elements.len(), found: labels.len() });
            }
        }
        Povm::with_labels(self.elements, self.labels, tol)
    }
}

/// Validates a candidate list of POVM elements.
///
/// Zero elements are dropped with a warning. All positivity and completeness
/// failures are collected into a single [`Error::InvalidPovm`] report.
pub fn validate_povm(elements: Vec<Operator>, tol: &Tolerances) -> Result<Povm> {
    Povm::with_labels(elements, None, tol)
}

impl Povm {
    pub fn new(elements: Vec<Operator>, tol: &Tolerances) -> Result<Self> {
        validate_povm(elements, tol)
    }

    pub fn with_labels(elements: Vec<Operator>, labels: Option<Vec<String>>, tol: &Tolerances) -> Result<Self> {
        let first = elements.first().ok_or(Error::Empty)?;
        let dim = first.dim();
        for e in &elements {
            first.check_dim(e)?;
        }
        if let Some(l) = &labels {
            if l.len() != elements.len() {
                return Err(Error::LengthMismatch { expected: elements.len(), found: l.len() });
            }
        }
        let mut kept = Vec::with_capacity(elements.len());
        let mut kept_labels = labels.as_ref().map(|_| Vec::new());
        for (i, e) in elements.into_iter().enumerate() {
            if e.norm() <= tol.psd_slack {
                warn!("dropping zero POVM element {i}");
                continue;
            }
            if let (Some(out), Some(src)) = (kept_labels.as_mut(), labels.as_ref()) {
                out.push(src[i].clone());
            }
            kept.push(e);
        }
        if kept.is_empty() {
            return Err(Error::InvalidPovm(vec![PovmDefect::NotComplete { residual: (dim as f64).sqrt() }]));
        }
        let mut defects = Vec::new();
        for (index, e) in kept.iter().enumerate() {
            if !e.is_self_adjoint(tol.lin_solve) {
                defects.push(PovmDefect::NotSelfAdjoint { index, deviation: e.self_adjoint_deviation() });
                continue;
            }
            let min_eigenvalue = e.min_eigenvalue();
            if min_eigenvalue < -tol.psd_slack {
                defects.push(PovmDefect::NotPositive { index, min_eigenvalue });
            }
        }
        let total = hs::sum(&kept).expect("non-empty");
        let residual = (&total - &Operator::identity(dim)).norm();
        if residual > tol.lin_solve {
            defects.push(PovmDefect::NotComplete { residual });
        }
        if !defects.is_empty() {
            return Err(Error::InvalidPovm(defects));
        }
        Ok(Self { dim, elements: kept, labels: kept_labels })
    }

    /// Skips validation; callers guarantee the POVM invariants.
    pub(crate) fn from_parts(dim: usize, elements: Vec<Operator>) -> Self {
        Self { dim, elements, labels: None }
    }

    /// The trivial one-outcome POVM `{I}`.
    pub fn trivial(d: usize) -> Self {
        Self::from_parts(d, vec![Operator::identity(d)])
    }

    /// Projective measurement of `σz`.
    pub fn sigma_z_projective() -> Self {
        spectral_povm(&Observable::new(Operator::sigma_z(), &Tolerances::default()).expect("σz"))
    }

    /// Qubit SIC POVM `{(I + n_k·σ)/4}` with `n_0 = (0, 0, 1)` and the other
    /// three Bloch vectors at polar angle `acos(-1/3)`, azimuths `0, 2π/3, 4π/3`.
    pub fn qubit_sic() -> Self {
        let elements = tetrahedron()
            .iter()
            .map(|n| Operator::bloch(0.25, 0.25 * n[0], 0.25 * n[1], 0.25 * n[2]))
            .collect();
        Self::from_parts(2, elements)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Operator] {
        &self.elements
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Born-rule probabilities `Tr[rho P_e]`.
    pub fn probabilities(&self, rho: &Operator) -> Vec<f64> {
        self.elements.iter().map(|p| p.expectation(rho).re).collect()
    }

    /// The synthesis map `Λ` as a d²×N matrix with columns `|P_i>`.
    pub fn synthesis_matrix(&self) -> DMatrix<C64> {
        synthesis_matrix(&self.elements).expect("non-empty POVM")
    }

    pub fn span_projector(&self, tol: &Tolerances) -> SubspaceProjector {
        span_projector(&self.elements, tol).expect("non-empty POVM")
    }

    pub fn span_dim(&self, tol: &Tolerances) -> usize {
        numerical_rank(&self.synthesis_matrix(), tol.eig_zero)
    }
}

/// Unit Bloch vectors of the regular tetrahedron used by [`Povm::qubit_sic`].
pub fn tetrahedron() -> [[f64; 3]; 4] {
    let s = (8.0f64 / 9.0).sqrt();
    let mut out = [[0.0, 0.0, 1.0]; 4];
    for (k, n) in out.iter_mut().enumerate().skip(1) {
        let phi = 2.0 * std::f64::consts::PI * (k - 1) as f64 / 3.0;
        *n = [s * phi.cos(), s * phi.sin(), -1.0 / 3.0];
    }
    out
}

/// Frame operator `F = sum_i |P_i><P_i|` (d²×d²).
pub fn frame_operator(p: &Povm) -> DMatrix<C64> {
    let lam = p.synthesis_matrix();
    &lam * lam.adjoint()
}

/// Operators paired one-to-one with POVM elements, `sum_i |D_i><P_i| = Π_Span(P)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualFrame {
    pub elements: Vec<Operator>,
}

impl DualFrame {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn adjoint(&self) -> Self {
        Self { elements: self.elements.iter().map(Operator::adjoint).collect() }
    }

    /// `(D_i + D_i^†) / 2` element-wise; still a dual of the same POVM.
    pub fn symmetrized(&self) -> Self {
        Self { elements: self.elements.iter().map(Operator::hermitian_part).collect() }
    }

    /// `sum_i |D_i><P_i|`.
    pub fn resolution(&self, p: &Povm) -> Result<DMatrix<C64>> {
        if self.len() != p.len() {
            return Err(Error::LengthMismatch { expected: p.len(), found: self.len() });
        }
        let d = p.dim();
        let mut out = DMatrix::zeros(d * d, d * d);
        for (dual, elem) in self.elements.iter().zip(p.elements()) {
            out += vectorize(dual).entries() * vectorize(elem).entries().adjoint();
        }
        Ok(out)
    }

    /// `||sum_i |D_i><P_i| - Π_Span(P)||_F`.
    pub fn resolution_residual(&self, p: &Povm, tol: &Tolerances) -> Result<f64> {
        Ok((self.resolution(p)? - p.span_projector(tol).matrix()).norm())
    }

    pub fn max_self_adjoint_deviation(&self) -> f64 {
        self.elements.iter().map(Operator::self_adjoint_deviation).fold(0.0, f64::max)
    }
}

/// Canonical dual `|Δ_i> = F^‡ |P_i>`, evaluated as the columns of
/// `(Λ^†)^‡ = F^‡ Λ` to avoid squaring the condition number of `Λ`.
pub fn canonical_dual(p: &Povm, tol: &Tolerances) -> DualFrame {
    let lam = p.synthesis_matrix();
    let duals = moore_penrose_with(&lam.adjoint(), tol.eig_zero);
    let d = p.dim();
    DualFrame {
        elements: (0..p.len()).map(|i| devectorize_raw(d, &duals.column(i).into_owned())).collect(),
    }
}

/// Alternate dual `z_i = w_i + y_i - sum_j y_j <v_j|w_i>` built from an
/// arbitrary operator list `Y`.
pub fn alternate_dual(p: &Povm, canonical: &DualFrame, y: &[Operator]) -> Result<DualFrame> {
    if canonical.len() != p.len() {
        return Err(Error::LengthMismatch { expected: p.len(), found: canonical.len() });
    }
    if y.len() != p.len() {
        return Err(Error::LengthMismatch { expected: p.len(), found: y.len() });
    }
    for yi in y {
        if yi.dim() != p.dim() {
            return Err(Error::DimensionMismatch { expected: p.dim(), found: yi.dim() });
        }
    }
    let mut elements = Vec::with_capacity(p.len());
    for w in &canonical.elements {
        let mut z = w + &y[elements.len()];
        for (vj, yj) in p.elements().iter().zip(y) {
            let overlap = hs_inner(vj, w)?;
            z = &z - &(yj * overlap);
        }
        elements.push(z);
    }
    Ok(DualFrame { elements })
}

/// True iff every operator of `r` lies in `Span(P)`, i.e. `Π_R Π_P = Π_R`.
pub fn is_r_infocomplete(p: &Povm, r: &[Operator], tol: &Tolerances) -> Result<bool> {
    if r.is_empty() {
        return Ok(true);
    }
    let pi_r = span_projector(r, tol)?;
    if pi_r.dim() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: pi_r.dim() });
    }
    let pi_p = p.span_projector(tol);
    Ok((pi_r.matrix() * pi_p.matrix() - pi_r.matrix()).norm() <= tol.lin_solve)
}

/// True iff the elements span the whole operator space.
pub fn is_infocomplete(p: &Povm, tol: &Tolerances) -> bool {
    numerical_rank(&frame_operator(p), tol.eig_zero) == p.dim() * p.dim()
}

/// Replaces every element by its rank-one spectral pieces.
pub fn rank_one_refinement(p: &Povm, tol: &Tolerances) -> Povm {
    let d = p.dim();
    let mut elements = Vec::new();
    let mut labels = Vec::new();
    for (i, e) in p.elements().iter().enumerate() {
        let (values, vectors) = e.eigh();
        for (k, &lambda) in values.iter().enumerate() {
            if lambda <= tol.psd_slack {
                continue;
            }
            let v = vectors.column(k).into_owned();
            elements.push(Operator::ket_bra(&v) * lambda);
            let base = p.labels().map(|l| l[i].clone()).unwrap_or_else(|| i.to_string());
            labels.push(format!("{base}.{k}"));
        }
    }
    Povm { dim: d, elements, labels: Some(labels) }
}

/// A self-adjoint operator together with its clustered spectral resolution.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    operator: Operator,
    eigenvalues: Vec<f64>,
    projectors: Vec<Operator>,
}

#[derive(Serialize, Deserialize)]
pub struct ObservableJson {
    pub operator: Operator,
}

impl Observable {
    pub fn new(operator: Operator, tol: &Tolerances) -> Result<Self> {
        if !operator.is_self_adjoint(tol.lin_solve) {
            return Err(Error::NotSelfAdjoint(operator.self_adjoint_deviation()));
        }
        let operator = operator.hermitian_part();
        let d = operator.dim();
        let (values, vectors) = operator.eigh();
        let mut eigenvalues = Vec::new();
        let mut projectors: Vec<Operator> = Vec::new();
        let mut members: Vec<f64> = Vec::new();
        let mut proj = Operator::zeros(d);
        for (k, &lambda) in values.iter().enumerate() {
            if let Some(&last) = members.last() {
                if lambda - last > tol.cluster {
                    eigenvalues.push(members.iter().sum::<f64>() / members.len() as f64);
                    projectors.push(std::mem::replace(&mut proj, Operator::zeros(d)));
                    members.clear();
                }
            }
            members.push(lambda);
            let v: DVector<C64> = vectors.column(k).into_owned();
            proj = &proj + &Operator::ket_bra(&v);
        }
        eigenvalues.push(members.iter().sum::<f64>() / members.len() as f64);
        projectors.push(proj);
        Ok(Self { operator, eigenvalues, projectors })
    }

    pub fn operator(&self) -> &Operator {
        &self.operator
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projectors(&self) -> &[Operator] {
        &self.projectors
    }

    /// Spectrum cardinality `s`.
    pub fn spectrum_size(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }
}

/// The projective POVM `[X_1, ..., X_s]` of an observable.
pub fn spectral_povm(x: &Observable) -> Povm {
    let labels = x.eigenvalues().iter().map(|v| format!("{v}")).collect();
    Povm { dim: x.dim(), elements: x.projectors().to_vec(), labels: Some(labels) }
}

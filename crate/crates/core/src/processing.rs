//! Data-processing functions, statistical error functionals and the
//! minimum-noise (optimal) dual frame for a prior ensemble.

use log::warn;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hs::{self, hs_inner, moore_penrose_abs, moore_penrose_with, vectorize, Operator, C64};
use crate::povm::{canonical_dual, DualFrame, Povm};
use crate::tol::Tolerances;

/// Checks that `rho` is a density operator.
pub fn validate_state(rho: &Operator, tol: &Tolerances) -> Result<()> {
    if !rho.is_self_adjoint(tol.lin_solve) {
        return Err(Error::InvalidState(format!(
            "not self-adjoint (deviation {:.3e})",
            rho.self_adjoint_deviation()
        )));
    }
    let tr = rho.trace().re;
    if (tr - 1.0).abs() > tol.lin_solve {
        return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
    }
    let min = rho.min_eigenvalue();
    if min < -tol.psd_slack {
        return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
    }
    Ok(())
}

/// Weighted list of states with the barycenter cached at construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EnsembleJson")]
pub struct Ensemble {
    states: Vec<WeightedState>,
    #[serde(skip)]
    barycenter: Operator,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedState {
    pub q: f64,
    pub rho: Operator,
}

#[derive(Deserialize)]
pub struct EnsembleJson {
    pub states: Vec<WeightedState>,
}

impl TryFrom<EnsembleJson> for Ensemble {
    type Error = Error;

    fn try_from(j: EnsembleJson) -> Result<Self> {
        Self::new(j.states, &Tolerances::default())
    }
}

impl Ensemble {
    pub fn new(states: Vec<WeightedState>, tol: &Tolerances) -> Result<Self> {
        let first = states.first().ok_or(Error::Empty)?;
        let d = first.rho.dim();
        let mut total = 0.0;
        for (j, s) in states.iter().enumerate() {
            if s.rho.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: s.rho.dim() });
            }
            if !(s.q > 0.0 && s.q <= 1.0 + tol.lin_solve) {
                return Err(Error::InvalidEnsemble(format!("weight {j} is {} (must lie in (0, 1])", s.q)));
            }
            validate_state(&s.rho, tol).map_err(|e| Error::InvalidEnsemble(format!("state {j}: {e}")))?;
            total += s.q;
        }
        if (total - 1.0).abs() > tol.lin_solve {
            return Err(Error::InvalidEnsemble(format!("weights sum to {total}")));
        }
        let barycenter = states
            .iter()
            .fold(Operator::zeros(d), |acc, s| &acc + &(&s.rho * s.q));
        Ok(Self { states, barycenter })
    }

    pub fn from_json(j: EnsembleJson, tol: &Tolerances) -> Result<Self> {
        Self::new(j.states, tol)
    }

    /// Uniform mixture of the six Pauli eigenstates.
    pub fn isotropic_six_state() -> Self {
        let mut states = Vec::with_capacity(6);
        for axis in [Operator::sigma_x(), Operator::sigma_y(), Operator::sigma_z()] {
            for sign in [1.0, -1.0] {
                let rho = (Operator::identity(2) + &axis * sign) * 0.5;
                states.push(WeightedState { q: 1.0 / 6.0, rho });
            }
        }
        Self::new(states, &Tolerances::default()).expect("six-state ensemble is valid")
    }

    /// The single state `I/d` with weight one.
    pub fn maximally_mixed(d: usize) -> Self {
        let rho = Operator::identity(d) * (1.0 / d as f64);
        Self { barycenter: rho.clone(), states: vec![WeightedState { q: 1.0, rho }] }
    }

    pub fn states(&self) -> &[WeightedState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.barycenter.dim()
    }

    /// `rho_E = sum_j q_j rho_j`.
    pub fn barycenter(&self) -> &Operator {
        &self.barycenter
    }

    /// `sum_j q_j <X>_j^2` for self-adjoint `X`.
    pub fn second_moment(&self, x: &Operator) -> f64 {
        self.cross_moment(x, x)
    }

    /// `sum_j q_j <X>_j <Y>_j`.
    pub fn cross_moment(&self, x: &Operator, y: &Operator) -> f64 {
        self.states
            .iter()
            .map(|s| s.q * x.expectation(&s.rho).re * y.expectation(&s.rho).re)
            .sum()
    }

    /// Diagonal metric `π_ii = Tr[rho_E P_i]`.
    pub fn metric(&self, p: &Povm) -> MetricMatrix {
        MetricMatrix { diag: p.probabilities(&self.barycenter) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricMatrix {
    pub diag: Vec<f64>,
}

impl MetricMatrix {
    /// Outcomes whose probability under the barycenter is numerically zero.
    pub fn degenerate_outcomes(&self, tol: &Tolerances) -> Vec<usize> {
        self.diag
            .iter()
            .enumerate()
            .filter(|(_, &p)| p <= tol.eig_zero)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Coefficients `c_i^X` reproducing `<X>` from outcome probabilities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessingFunction {
    pub target: Operator,
    pub coefficients: Vec<C64>,
}

impl ProcessingFunction {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// `||sum_i c_i |P_i> - |X>||`.
    pub fn synthesis_residual(&self, p: &Povm) -> f64 {
        let synth = p
            .elements()
            .iter()
            .zip(&self.coefficients)
            .fold(Operator::zeros(p.dim()), |acc, (e, &c)| &acc + &(e * c));
        (&synth - &self.target).norm()
    }
}

fn check_in_span(p: &Povm, x: &Operator, tol: &Tolerances) -> Result<()> {
    if x.dim() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: x.dim() });
    }
    let residual = p.span_projector(tol).residual(x);
    if residual > tol.lin_solve * x.norm().max(1.0) {
        return Err(Error::OutsideSpan(residual));
    }
    Ok(())
}

/// `c_i^X = <D_i|X> = Tr[D_i^† X]`.
pub fn processing_from_dual(p: &Povm, dual: &DualFrame, x: &Operator, tol: &Tolerances) -> Result<ProcessingFunction> {
    if dual.len() != p.len() {
        return Err(Error::LengthMismatch { expected: p.len(), found: dual.len() });
    }
    check_in_span(p, x, tol)?;
    let coefficients = dual
        .elements
        .iter()
        .map(|d| hs_inner(d, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(ProcessingFunction { target: x.clone(), coefficients })
}

/// `sum_i c_i Tr[rho P_i]` (real part).
pub fn estimate(p: &Povm, c: &ProcessingFunction, rho: &Operator) -> Result<f64> {
    if c.len() != p.len() {
        return Err(Error::LengthMismatch { expected: p.len(), found: c.len() });
    }
    Ok(p.probabilities(rho)
        .iter()
        .zip(&c.coefficients)
        .map(|(&prob, ci)| ci.re * prob)
        .sum())
}

fn second_term(p: &Povm, c: &ProcessingFunction, state: &Operator) -> Result<f64> {
    if c.len() != p.len() {
        return Err(Error::LengthMismatch { expected: p.len(), found: c.len() });
    }
    Ok(p.probabilities(state)
        .iter()
        .zip(&c.coefficients)
        .map(|(&prob, ci)| ci.norm_sqr() * prob)
        .sum())
}

fn require_self_adjoint(x: &Operator, tol: &Tolerances) -> Result<()> {
    if !x.is_self_adjoint(tol.lin_solve) {
        return Err(Error::NotSelfAdjoint(x.self_adjoint_deviation()));
    }
    Ok(())
}

/// `δ²_ρ(X) = sum_i |c_i|² Tr[rho P_i] - <X>_ρ²`.
///
/// The per-experiment standard error is `sqrt(δ²_ρ / (N_ex - 1))`.
pub fn statistical_error(p: &Povm, c: &ProcessingFunction, rho: &Operator, tol: &Tolerances) -> Result<f64> {
    require_self_adjoint(&c.target, tol)?;
    let mean = c.target.expectation(rho).re;
    Ok(second_term(p, c, rho)? - mean * mean)
}

/// Ensemble-averaged error `sum_i |c_i|² Tr[rho_E P_i] - sum_j q_j <X>_j²`.
pub fn ensemble_error(p: &Povm, c: &ProcessingFunction, e: &Ensemble, tol: &Tolerances) -> Result<f64> {
    require_self_adjoint(&c.target, tol)?;
    if e.dim() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: e.dim() });
    }
    Ok(second_term(p, c, e.barycenter())? - e.second_moment(&c.target))
}

/// `M_ij = Tr[Δ_i P_j]`, the orthogonal projector onto the row space of Λ.
pub fn dual_overlap(p: &Povm, dual: &DualFrame) -> DMatrix<f64> {
    let n = p.len();
    DMatrix::from_fn(n, n, |i, j| (&dual.elements[i] * &p.elements()[j]).trace().re)
}

/// Minimum-ensemble-error dual
/// `D_i = Δ_i - sum_j {[(I - M) π (I - M)]^‡ π}_ij Δ_j`.
///
/// Outcomes with `π_ii = 0` carry no weight in the correction; they are
/// reported through a log warning only.
pub fn optimal_dual(p: &Povm, e: &Ensemble, tol: &Tolerances) -> Result<DualFrame> {
    if e.dim() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: e.dim() });
    }
    let metric = e.metric(p);
    let degenerate = metric.degenerate_outcomes(tol);
    if !degenerate.is_empty() {
        warn!("{}", Error::DegenerateMetric(degenerate));
    }
    let canonical = canonical_dual(p, tol);
    let n = p.len();
    let m = dual_overlap(p, &canonical);
    let pi = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, metric.diag.iter().map(|&x| x.max(0.0))));
    let complement = DMatrix::<f64>::identity(n, n) - &m;
    let weighted = &complement * &pi * &complement;
    // The complement vanishes up to rounding for informationally complete
    // POVMs, so the cutoff is absolute, on the scale of the metric.
    let pi_max = metric.diag.iter().fold(0.0f64, |a, &b| a.max(b));
    let correction = moore_penrose_abs(&weighted, tol.eig_zero * pi_max.max(f64::MIN_POSITIVE)) * &pi;
    let elements = (0..n)
        .map(|i| {
            let shift = (0..n).fold(Operator::zeros(p.dim()), |acc, j| &acc + &(&canonical.elements[j] * correction[(i, j)]));
            &canonical.elements[i] - &shift
        })
        .collect();
    Ok(DualFrame { elements })
}

/// Residual of the minimum-norm condition `πΓΛ = Λ^†Γ^†π`, where
/// `(ΓΛ)_ij = Tr[D_i^† P_j]`.
pub fn min_norm_residual(p: &Povm, dual: &DualFrame, e: &Ensemble) -> f64 {
    let pi = e.metric(p).diag;
    let n = p.len();
    let g = DMatrix::from_fn(n, n, |i, j| hs_inner(&dual.elements[i], &p.elements()[j]).expect("same dim"));
    let lhs = DMatrix::from_fn(n, n, |i, j| g[(i, j)] * pi[i]);
    let rhs = DMatrix::from_fn(n, n, |i, j| g[(j, i)].conj() * pi[j]);
    (lhs - rhs).norm()
}

/// Compact minimum-noise formula
/// `<X|(Λ π^{-1} Λ^†)^‡|X> - sum_j q_j <X>_j²`.
pub fn min_error(p: &Povm, e: &Ensemble, x: &Operator, tol: &Tolerances) -> Result<f64> {
    require_self_adjoint(x, tol)?;
    check_in_span(p, x, tol)?;
    if e.dim() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: e.dim() });
    }
    let metric = e.metric(p);
    let degenerate = metric.degenerate_outcomes(tol);
    if !degenerate.is_empty() {
        warn!("{}", Error::DegenerateMetric(degenerate.clone()));
    }
    let d = p.dim();
    let mut g = DMatrix::<C64>::zeros(d * d, d * d);
    for (i, elem) in p.elements().iter().enumerate() {
        if degenerate.contains(&i) {
            continue;
        }
        let v = vectorize(elem);
        g += v.entries() * v.entries().adjoint() * C64::new(1.0 / metric.diag[i], 0.0);
    }
    let g_pinv = moore_penrose_with(&g, tol.eig_zero);
    let v = vectorize(x);
    let quad = v.entries().dotc(&(&g_pinv * v.entries())).re;
    Ok(quad - e.second_moment(x))
}

/// Canonical-dual processing for every operator in a list, as used by the
/// CLI and the post-processing routines.
pub fn processing_matrix(p: &Povm, dual: &DualFrame, targets: &[Operator]) -> Result<Vec<Vec<f64>>> {
    if dual.len() != p.len() {
        return Err(Error::LengthMismatch { expected: p.len(), found: dual.len() });
    }
    dual.elements
        .iter()
        .map(|d| targets.iter().map(|q| Ok(hs_inner(d, q)?.re)).collect())
        .collect()
}

/// `sum_i c_i P_i` for real coefficients.
pub fn synthesize(p: &Povm, coefficients: &[f64]) -> Operator {
    let parts: Vec<Operator> = p.elements().iter().zip(coefficients).map(|(e, &c)| e * c).collect();
    hs::sum(&parts).unwrap_or_else(|| Operator::zeros(p.dim()))
}

//! Post-processing of POVMs by Markov maps: the elementary transformations,
//! the cleanness pseudo-order, smearing and blurring with unbiased
//! retrieval, convex unions and joint-measurement certificates.

use log::warn;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hs::{hermitian_coords, span_projector, Operator};
use crate::lp;
use crate::povm::{spectral_povm, Observable, Povm};
use crate::processing::{optimal_dual, Ensemble};
use crate::tol::Tolerances;

/// Per-element synthesis residual accepted when certifying a post-processing.
pub const FEASIBILITY_RESIDUAL: f64 = 1e-8;

/// Conditional probabilities `m(j|i)`, stored row-major as `m[j][i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MarkovJson", into = "MarkovJson")]
pub struct MarkovMatrix {
    m: Vec<Vec<f64>>,
    cols: usize,
}

#[derive(Serialize, Deserialize)]
struct MarkovJson {
    rows: usize,
    cols: usize,
    m: Vec<Vec<f64>>,
}

impl TryFrom<MarkovJson> for MarkovMatrix {
    type Error = Error;

    fn try_from(j: MarkovJson) -> Result<Self> {
        if j.m.len() != j.rows {
            return Err(Error::LengthMismatch { expected: j.rows, found: j.m.len() });
        }
        let out = MarkovMatrix::new(j.m, &Tolerances::default())?;
        if out.cols != j.cols {
            return Err(Error::LengthMismatch { expected: j.cols, found: out.cols });
        }
        Ok(out)
    }
}

impl From<MarkovMatrix> for MarkovJson {
    fn from(m: MarkovMatrix) -> Self {
        MarkovJson { rows: m.rows(), cols: m.cols, m: m.m }
    }
}

impl MarkovMatrix {
    pub fn new(m: Vec<Vec<f64>>, tol: &Tolerances) -> Result<Self> {
        let rows = m.len();
        if rows == 0 {
            return Err(Error::Empty);
        }
        let cols = m[0].len();
        if cols == 0 {
            return Err(Error::Empty);
        }
        for (j, row) in m.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::InvalidMarkov(format!("row {j} has {} entries, expected {cols}", row.len())));
            }
            for (i, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < -tol.psd_slack {
                    return Err(Error::InvalidMarkov(format!("entry m({j}|{i}) = {v}")));
                }
            }
        }
        for i in 0..cols {
            let s: f64 = m.iter().map(|row| row[i]).sum();
            if (s - 1.0).abs() > tol.lin_solve {
                return Err(Error::InvalidMarkov(format!("column {i} sums to {s}")));
            }
        }
        Ok(Self { m, cols })
    }

    pub fn identity(n: usize) -> Self {
        let m = (0..n).map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        Self { m, cols: n }
    }

    /// Every input mapped to the same output distribution `weights`.
    pub fn pure_guessing(weights: &[f64], cols: usize, tol: &Tolerances) -> Result<Self> {
        Self::new(weights.iter().map(|&w| vec![w; cols]).collect(), tol)
    }

    pub fn rows(&self) -> usize {
        self.m.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// `m(j|i)`.
    pub fn get(&self, j: usize, i: usize) -> f64 {
        self.m[j][i]
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.m
    }

    /// The map obtained by applying `first` and then `self`:
    /// `m''(i|j) = sum_k self(i|k) first(k|j)`.
    pub fn compose(&self, first: &MarkovMatrix) -> Result<Self> {
        if self.cols != first.rows() {
            return Err(Error::LengthMismatch { expected: self.cols, found: first.rows() });
        }
        let m = (0..self.rows())
            .map(|i| {
                (0..first.cols)
                    .map(|j| (0..self.cols).map(|k| self.m[i][k] * first.m[k][j]).sum())
                    .collect()
            })
            .collect();
        Ok(Self { m, cols: first.cols })
    }

    /// True when every input column is the same distribution (pure guessing).
    pub fn has_constant_columns(&self, tol: f64) -> bool {
        self.m.iter().all(|row| row.iter().all(|&v| (v - row[0]).abs() <= tol))
    }
}

/// `Q_j = sum_i m(j|i) P_i`.
pub fn apply_post_processing(p: &Povm, m: &MarkovMatrix, tol: &Tolerances) -> Result<Povm> {
    if m.cols() != p.len() {
        return Err(Error::LengthMismatch { expected: p.len(), found: m.cols() });
    }
    let elements = m
        .entries()
        .iter()
        .map(|row| {
            row.iter()
                .zip(p.elements())
                .fold(Operator::zeros(p.dim()), |acc, (&w, e)| &acc + &(e * w))
        })
        .collect();
    Povm::new(elements, tol)
}

fn check_index(index: usize, len: usize) -> Result<()> {
    if index >= len {
        return Err(Error::IndexOutOfRange { index, len });
    }
    Ok(())
}

/// T1: outcomes `j` and `k` merged into position `min(j, k)`.
pub fn t1_matrix(n: usize, j: usize, k: usize) -> Result<MarkovMatrix> {
    check_index(j, n)?;
    check_index(k, n)?;
    if j == k {
        return Err(Error::InvalidParameter("T1 needs two distinct outcomes".into()));
    }
    let (keep, gone) = (j.min(k), j.max(k));
    let target = |i: usize| match i {
        i if i == gone => keep,
        i if i > gone => i - 1,
        i => i,
    };
    let m = (0..n - 1)
        .map(|row| (0..n).map(|i| if target(i) == row { 1.0 } else { 0.0 }).collect())
        .collect();
    Ok(MarkovMatrix { m, cols: n })
}

/// T2: outcome `k` relabelled as `perm[k]`.
pub fn t2_matrix(perm: &[usize]) -> Result<MarkovMatrix> {
    let n = perm.len();
    let mut seen = vec![false; n];
    for &t in perm {
        check_index(t, n)?;
        if std::mem::replace(&mut seen[t], true) {
            return Err(Error::InvalidParameter(format!("{perm:?} is not a permutation")));
        }
    }
    let m = (0..n)
        .map(|row| (0..n).map(|k| if perm[k] == row { 1.0 } else { 0.0 }).collect())
        .collect();
    Ok(MarkovMatrix { m, cols: n })
}

/// T3: outcome `l` split into `p P_l` (kept at `l`) and `(1-p) P_l`
/// (inserted at `l + 1`).
pub fn t3_matrix(n: usize, l: usize, p: f64) -> Result<MarkovMatrix> {
    check_index(l, n)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("split probability {p} outside (0, 1)")));
    }
    let m = (0..=n)
        .map(|row| {
            (0..n)
                .map(|i| match (row, i) {
                    (r, i) if i == l && r == l => p,
                    (r, i) if i == l && r == l + 1 => 1.0 - p,
                    (r, i) if i < l && r == i => 1.0,
                    (r, i) if i > l && r == i + 1 => 1.0,
                    _ => 0.0,
                })
                .collect()
        })
        .collect();
    Ok(MarkovMatrix { m, cols: n })
}

pub fn t1_identify(p: &Povm, j: usize, k: usize, tol: &Tolerances) -> Result<Povm> {
    apply_post_processing(p, &t1_matrix(p.len(), j, k)?, tol)
}

pub fn t2_permute(p: &Povm, perm: &[usize], tol: &Tolerances) -> Result<Povm> {
    if perm.len() != p.len() {
        return Err(Error::LengthMismatch { expected: p.len(), found: perm.len() });
    }
    apply_post_processing(p, &t2_matrix(perm)?, tol)
}

pub fn t3_split(p: &Povm, l: usize, prob: f64, tol: &Tolerances) -> Result<Povm> {
    apply_post_processing(p, &t3_matrix(p.len(), l, prob)?, tol)
}

/// Outcome of the post-processing feasibility program.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum PostProcessingVerdict {
    /// `markov` reproduces every target element within `residual`.
    Feasible { markov: MarkovMatrix, residual: f64 },
    /// No Markov matrix gets closer than `min_residual` (max-coordinate norm).
    Infeasible { min_residual: f64 },
}

impl PostProcessingVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, PostProcessingVerdict::Feasible { .. })
    }

    pub fn markov(&self) -> Option<&MarkovMatrix> {
        match self {
            PostProcessingVerdict::Feasible { markov, .. } => Some(markov),
            PostProcessingVerdict::Infeasible { .. } => None,
        }
    }
}

fn synthesis_residual(q: &Povm, p: &Povm, m: &MarkovMatrix) -> f64 {
    q.elements()
        .iter()
        .zip(m.entries())
        .map(|(target, row)| {
            let synth = row
                .iter()
                .zip(p.elements())
                .fold(Operator::zeros(p.dim()), |acc, (&w, e)| &acc + &(e * w));
            (&synth - target).norm()
        })
        .fold(0.0, f64::max)
}

/// Decides whether `q` is a post-processing of `p` (`P ≻ Q`).
pub fn is_post_processing_of(q: &Povm, p: &Povm, tol: &Tolerances) -> Result<PostProcessingVerdict> {
    if q.dim() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: q.dim() });
    }
    let a: Vec<Vec<f64>> = p.elements().iter().map(hermitian_coords).collect();
    let b: Vec<Vec<f64>> = q.elements().iter().map(hermitian_coords).collect();
    let (m, t) = lp::min_max_residual(&a, &b)?;
    if t > FEASIBILITY_RESIDUAL {
        return Ok(PostProcessingVerdict::Infeasible { min_residual: t });
    }
    let markov = MarkovMatrix::new(m, tol)?;
    let residual = synthesis_residual(q, p, &markov);
    if residual > FEASIBILITY_RESIDUAL {
        return Ok(PostProcessingVerdict::Infeasible { min_residual: t.max(residual / (p.dim() * p.dim()) as f64) });
    }
    Ok(PostProcessingVerdict::Feasible { markov, residual })
}

/// Rank-one test: a POVM is post-processing clean iff every element has
/// numerical rank at most one.
pub fn is_clean(p: &Povm, tol: &Tolerances) -> bool {
    p.elements().iter().all(|e| {
        let ev = e.eigenvalues();
        ev.len() < 2 || ev[ev.len() - 2] <= tol.psd_slack
    })
}

/// Smeared-out version of `q` given a normalized processing array
/// `c[i][j] = c_i^{Q_j}` relative to some POVM with `c.len()` outcomes.
///
/// Returns `Q~_j = (Q_j + α_j I) / (1 + sum_l α_l)` and the Markov matrix
/// `m(j|i) = (c_i^{Q_j} + α_j) / (1 + sum_l α_l)`.
pub fn smear_out(q: &Povm, c: &[Vec<f64>], tol: &Tolerances) -> Result<(Povm, MarkovMatrix)> {
    let mq = q.len();
    for (i, row) in c.iter().enumerate() {
        if row.len() != mq {
            return Err(Error::LengthMismatch { expected: mq, found: row.len() });
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > tol.lin_solve {
            return Err(Error::InvalidParameter(format!("processing row {i} sums to {s}, expected 1")));
        }
    }
    let alpha: Vec<f64> = (0..mq)
        .map(|j| c.iter().map(|row| -row[j]).fold(0.0, f64::max))
        .collect();
    let norm = 1.0 + alpha.iter().sum::<f64>();
    let id = Operator::identity(q.dim());
    let elements = q
        .elements()
        .iter()
        .zip(&alpha)
        .map(|(e, &a)| &(e + &(&id * a)) * (1.0 / norm))
        .collect();
    let m = (0..mq)
        .map(|j| c.iter().map(|row| (row[j] + alpha[j]) / norm).collect())
        .collect();
    Ok((Povm::new(elements, tol)?, MarkovMatrix::new(m, tol)?))
}

/// Result of blurring a target POVM until its processing over `P` becomes
/// a conditional probability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlurResult {
    pub epsilon_star: f64,
    pub c_bar: f64,
    pub blurred: Povm,
    pub markov: MarkovMatrix,
    /// Error inflation `1 / (1 - ε*)²` of the retrieved probabilities.
    pub inflation: f64,
    /// Optimal-dual processing `c[i][j] = c_i^{Q_j}` of the unblurred target.
    pub coefficients: Vec<Vec<f64>>,
    /// `max_j ||Q_j(ε*) - sum_i m(j|i) P_i||`.
    pub synthesis_residual: f64,
}

impl BlurResult {
    pub fn outcomes(&self) -> usize {
        self.markov.rows()
    }

    /// `(f_j - ε*/M) / (1 - ε*)` without clamping.
    pub fn retrieve(&self, observed: &[f64]) -> Vec<f64> {
        let mq = self.outcomes() as f64;
        observed
            .iter()
            .map(|&f| (f - self.epsilon_star / mq) / (1.0 - self.epsilon_star))
            .collect()
    }
}

/// Minimal uniform blur `Q_j(ε) = (1-ε) Q_j + ε I/M` of `q` that is a
/// post-processing of `p`, using the optimal dual of `p` for ensemble `e`.
pub fn blur_for_post_processing(p: &Povm, q: &Povm, e: &Ensemble, tol: &Tolerances) -> Result<BlurResult> {
    if q.dim() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: q.dim() });
    }
    let span = p.span_projector(tol);
    let outside = q.elements().iter().map(|qj| span.residual(qj)).fold(0.0, f64::max);
    if outside > tol.lin_solve {
        return Err(Error::OutsideSpan(outside));
    }
    let degenerate = e.metric(p).degenerate_outcomes(tol);
    if !degenerate.is_empty() {
        return Err(Error::DegenerateMetric(degenerate));
    }
    let dual = optimal_dual(p, e, tol)?;
    let mq = q.len();
    let coefficients: Vec<Vec<f64>> = dual
        .elements
        .iter()
        .map(|d| q.elements().iter().map(|qj| (d * qj).trace().re).collect())
        .collect();
    let c_bar = coefficients.iter().flatten().fold(0.0f64, |acc, &c| acc.min(c));
    let mc = mq as f64 * c_bar;
    let epsilon_star = -mc / (1.0 - mc);
    assert!(epsilon_star < 1.0, "blur parameter must stay below one");
    let id = Operator::identity(q.dim());
    let blurred_elements: Vec<Operator> = q
        .elements()
        .iter()
        .map(|qj| &(qj * (1.0 - epsilon_star)) + &(&id * (epsilon_star / mq as f64)))
        .collect();
    let m: Vec<Vec<f64>> = blurred_elements
        .iter()
        .map(|qj| {
            dual.elements
                .iter()
                .map(|d| {
                    let v = (d * qj).trace().re;
                    if v < 0.0 && v > -tol.lin_solve {
                        0.0
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect();
    let markov = MarkovMatrix::new(m, tol)?;
    let blurred = Povm::new(blurred_elements, tol)?;
    let synthesis_residual = synthesis_residual(&blurred, p, &markov);
    Ok(BlurResult {
        epsilon_star,
        c_bar,
        blurred,
        markov,
        inflation: 1.0 / (1.0 - epsilon_star).powi(2),
        coefficients,
        synthesis_residual,
    })
}

/// Retrieves `Tr[rho Q_j]` from the observed blurred frequencies; results
/// are clamped to `[0, 1]`.
pub fn unbias(blur: &BlurResult, observed: &[f64]) -> Result<Vec<f64>> {
    if observed.len() != blur.outcomes() {
        return Err(Error::LengthMismatch { expected: blur.outcomes(), found: observed.len() });
    }
    let raw = blur.retrieve(observed);
    if raw.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
        warn!("unbiased probabilities fall outside [0, 1]; clamping");
    }
    Ok(raw.into_iter().map(|v| v.clamp(0.0, 1.0)).collect())
}

/// `<X> = (<X(ε*)> - (ε*/M) sum_j x_j) / (1 - ε*)` for a blur of the
/// spectral POVM of `x`; `sum_j x_j = Tr[X]` for non-degenerate spectra.
pub fn unbias_expectation(blur: &BlurResult, observed: &[f64], x: &Observable) -> Result<f64> {
    if observed.len() != blur.outcomes() {
        return Err(Error::LengthMismatch { expected: blur.outcomes(), found: observed.len() });
    }
    if x.spectrum_size() != blur.outcomes() {
        return Err(Error::LengthMismatch { expected: blur.outcomes(), found: x.spectrum_size() });
    }
    let eps = blur.epsilon_star;
    let mq = blur.outcomes() as f64;
    let blurred_mean: f64 = observed.iter().zip(x.eigenvalues()).map(|(f, v)| f * v).sum();
    let eig_sum: f64 = x.eigenvalues().iter().sum();
    Ok((blurred_mean - eps / mq * eig_sum) / (1.0 - eps))
}

/// Expected value of the blur-then-unbias estimator of `<X>` on `rho`,
/// computed from exact outcome probabilities of `p`.
pub fn blurred_expectation(p: &Povm, blur: &BlurResult, x: &Observable, rho: &Operator) -> Result<f64> {
    if blur.markov.cols() != p.len() {
        return Err(Error::LengthMismatch { expected: p.len(), found: blur.markov.cols() });
    }
    let probs = p.probabilities(rho);
    let observed: Vec<f64> = blur
        .markov
        .entries()
        .iter()
        .map(|row| row.iter().zip(&probs).map(|(m, pr)| m * pr).sum())
        .collect();
    unbias_expectation(blur, &observed, x)
}

/// `λ P ∪ (1-λ) Q`.
pub fn convex_union(p: &Povm, q: &Povm, lambda: f64, tol: &Tolerances) -> Result<Povm> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!("convex weight {lambda} outside [0, 1]")));
    }
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: q.dim() });
    }
    let elements = p
        .elements()
        .iter()
        .map(|e| e * lambda)
        .chain(q.elements().iter().map(|e| e * (1.0 - lambda)))
        .collect();
    Povm::new(elements, tol)
}

/// Every element commutes with `x` and is a function of it.
pub fn commutation_criterion(p: &Povm, x: &Observable, tol: &Tolerances) -> Result<bool> {
    if p.dim() != x.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: x.dim() });
    }
    let span = span_projector(x.projectors(), tol)?;
    Ok(p.elements().iter().all(|e| {
        e.commutator(x.operator()).norm() <= tol.lin_solve && span.residual(e) <= tol.lin_solve
    }))
}

/// True iff `p` is a post-processing of the spectral POVM of `x`.
pub fn is_imperfect_measurement_of(p: &Povm, x: &Observable, tol: &Tolerances) -> Result<bool> {
    let verdict = is_post_processing_of(p, &spectral_povm(x), tol)?;
    let commutes = commutation_criterion(p, x, tol)?;
    if verdict.is_feasible() != commutes {
        warn!(
            "post-processing verdict ({}) disagrees with commutation criterion ({commutes})",
            verdict.is_feasible()
        );
    }
    Ok(verdict.is_feasible())
}

/// Post-processing of `P` into `s + 1` outcomes that is a function of one
/// observable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointCertificate {
    pub markov: MarkovMatrix,
    /// `sum_h Tr[R_h X_h] / Tr[X_h]`; at most one for pure guessing.
    pub sharpness: f64,
    /// All Markov columns identical (pure-guessing certificate).
    pub trivial: bool,
    /// `max_j ||[R_j, X]||`.
    pub commutator_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum JointMeasurementVerdict {
    Feasible {
        certificates: Vec<JointCertificate>,
        /// `P` has the shape of a convex union of projective measurements.
        convex_union: bool,
    },
    Infeasible { index: usize },
}

fn joint_certificate(p: &Povm, x: &Observable, tol: &Tolerances) -> Result<Option<JointCertificate>> {
    if p.dim() != x.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: x.dim() });
    }
    let d = p.dim();
    let s = x.spectrum_size();
    // Hermitian coordinates orthogonal to span{X_h}.
    let proj_coords = DMatrix::from_fn(d * d, s, |k, h| hermitian_coords(&x.projectors()[h])[k]);
    let dec = crate::hs::svd(&proj_coords);
    let rank = dec.above(tol.eig_zero);
    let u_r = dec.u.columns(0, rank);
    let complement = DMatrix::<f64>::identity(d * d, d * d) - u_r * u_r.transpose();
    let elem_coords = DMatrix::from_fn(d * d, p.len(), |k, i| hermitian_coords(&p.elements()[i])[k]);
    let constraint = complement * elem_coords;
    let weights: Vec<Vec<f64>> = x
        .projectors()
        .iter()
        .map(|xh| {
            let tr = xh.trace().re;
            p.elements().iter().map(|e| (e * xh).trace().re / tr).collect()
        })
        .collect();
    let (m, sharpness) = match lp::max_weight_with_nullspace(s + 1, &weights, &constraint, tol.eig_zero) {
        Ok(v) => v,
        Err(Error::Solver(msg)) => {
            warn!("joint-measurement program failed: {msg}");
            return Ok(None);
        }
        Err(e) => return Err(e),
    };
    let markov = MarkovMatrix::new(m, tol)?;
    let outputs = apply_post_processing(p, &markov, tol)?;
    let commutator_residual = outputs
        .elements()
        .iter()
        .map(|r| r.commutator(x.operator()).norm())
        .fold(0.0, f64::max);
    if commutator_residual > FEASIBILITY_RESIDUAL {
        return Ok(None);
    }
    let trivial = markov.has_constant_columns(FEASIBILITY_RESIDUAL);
    Ok(Some(JointCertificate { markov, sharpness, trivial, commutator_residual }))
}

/// Searches, per observable, a post-processing of `p` that is an imperfect
/// measurement of it. Output cardinality is capped at `s_k + 1`.
pub fn is_joint_measurement(p: &Povm, observables: &[Observable], tol: &Tolerances) -> Result<JointMeasurementVerdict> {
    let results: Vec<Result<Option<JointCertificate>>> =
        observables.par_iter().map(|x| joint_certificate(p, x, tol)).collect();
    let mut certificates = Vec::with_capacity(observables.len());
    for (index, r) in results.into_iter().enumerate() {
        match r? {
            Some(c) => certificates.push(c),
            None => return Ok(JointMeasurementVerdict::Infeasible { index }),
        }
    }
    Ok(JointMeasurementVerdict::Feasible { certificates, convex_union: is_convex_union_shaped(p, tol) })
}

/// Detects `P = ∪_g λ_g X^(g)` with at least two projective blocks, each
/// element a multiple of a projector. Greedy grouping; not a complete
/// classification.
pub fn is_convex_union_shaped(p: &Povm, tol: &Tolerances) -> bool {
    let d = p.dim();
    let scale: Vec<Option<f64>> = p
        .elements()
        .iter()
        .map(|e| {
            let ev = e.eigenvalues();
            let top = *ev.last().expect("non-empty");
            let ok = ev.iter().all(|&v| v.abs() <= tol.cluster || (v - top).abs() <= tol.cluster);
            ok.then_some(top)
        })
        .collect();
    if scale.iter().any(Option::is_none) {
        return false;
    }
    let mut used = vec![false; p.len()];
    let mut groups = 0;
    for i in 0..p.len() {
        if used[i] {
            continue;
        }
        let lambda = scale[i].expect("checked");
        let mut acc = p.elements()[i].clone();
        let mut members = vec![i];
        for j in (i + 1)..p.len() {
            if used[j] || (scale[j].expect("checked") - lambda).abs() > tol.cluster {
                continue;
            }
            if (&acc * &p.elements()[j]).norm() <= tol.cluster {
                acc = &acc + &p.elements()[j];
                members.push(j);
            }
        }
        if (&acc - &(Operator::identity(d) * lambda)).norm() > tol.cluster {
            return false;
        }
        for m in members {
            used[m] = true;
        }
        groups += 1;
    }
    groups >= 2
}

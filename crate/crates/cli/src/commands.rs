//! One function per verb. Each returns the artifact kind, its JSON result
//! and whether the verdict was negative.

use std::path::{Path, PathBuf};

use povmlab::abspace::{ab_space, ab_verdict, lemma1_projection, AbSpaceJson, AbVerdict, Lemma1Outcome};
use povmlab::montecarlo::{simulate, SimulationReport};
use povmlab::postproc::{
    blur_for_post_processing, is_clean, is_joint_measurement, is_post_processing_of, BlurResult, JointMeasurementVerdict,
    PostProcessingVerdict,
};
use povmlab::povm::{alternate_dual, canonical_dual, is_infocomplete, is_r_infocomplete, PovmJson};
use povmlab::processing::{
    ensemble_error, min_error, min_norm_residual, optimal_dual, processing_from_dual, validate_state, EnsembleJson,
};
use povmlab::qubit::{noise_quantities, sweep, BlochPovm, Family, NoiseSummary, SweepRow};
use povmlab::{DualFrame, Ensemble, Error, Observable, Operator, Povm, PovmDefect, Tolerances};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::Settings;
use crate::io::{envelope_result, read_json, read_json_from, read_text, Failure, VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Input failed validation; the report is still written. Exit code 2.
    Invalid,
    /// Infeasible or negative verdict. Exit code 3.
    Negative,
}

pub struct Output {
    pub kind: &'static str,
    pub result: Value,
    pub status: Status,
}

impl Output {
    fn new<T: Serialize>(kind: &'static str, result: &T, status: Status) -> Self {
        Output { kind, result: serde_json::to_value(result).expect("serializable result"), status }
    }
}

fn status_if(negative: bool) -> Status {
    if negative {
        Status::Negative
    } else {
        Status::Ok
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ObservableInput {
    Wrapped { operator: Operator },
    Bare(Operator),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OperatorList {
    Bare(Vec<Operator>),
    Elements { elements: Vec<Operator> },
    Operators { operators: Vec<Operator> },
}

impl OperatorList {
    fn into_vec(self) -> Vec<Operator> {
        match self {
            OperatorList::Bare(v) | OperatorList::Elements { elements: v } | OperatorList::Operators { operators: v } => v,
        }
    }
}

pub fn load_povm(path: &Path, tol: &Tolerances) -> Result<Povm, Failure> {
    Ok(read_json_from::<PovmJson>(path, &["blurred", "povm"])?.into_povm(tol)?)
}

fn load_operator(path: &Path) -> Result<Operator, Failure> {
    Ok(match read_json::<ObservableInput>(path)? {
        ObservableInput::Wrapped { operator } | ObservableInput::Bare(operator) => operator,
    })
}

fn load_self_adjoint(path: &Path, tol: &Tolerances) -> Result<Operator, Failure> {
    let x = load_operator(path)?;
    if !x.is_self_adjoint(tol.lin_solve) {
        return Err(Error::NotSelfAdjoint(x.self_adjoint_deviation()).into());
    }
    Ok(x.hermitian_part())
}

fn load_state(path: &Path, tol: &Tolerances) -> Result<Operator, Failure> {
    let rho = load_operator(path)?;
    validate_state(&rho, tol)?;
    Ok(rho.hermitian_part())
}

fn load_operators(path: &Path) -> Result<Vec<Operator>, Failure> {
    Ok(read_json::<OperatorList>(path)?.into_vec())
}

/// A preset name (`six-state`, `maximally-mixed`) or an ensemble file.
pub fn load_ensemble(source: &str, dim: usize, tol: &Tolerances) -> Result<Ensemble, Failure> {
    match source {
        "six-state" | "isotropic-six-state" => {
            if dim != 2 {
                return Err(Failure::Validation(format!("the six-state ensemble is a qubit ensemble, POVM has d = {dim}")));
            }
            Ok(Ensemble::isotropic_six_state())
        }
        "maximally-mixed" | "maximally-mixed-only" => Ok(Ensemble::maximally_mixed(dim)),
        path => {
            let e = Ensemble::from_json(read_json::<EnsembleJson>(Path::new(path))?, tol)?;
            if e.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: e.dim() }.into());
            }
            Ok(e)
        }
    }
}

fn real_parts(p: &Povm, dual: &DualFrame, x: &Operator, tol: &Tolerances) -> Result<Vec<f64>, Failure> {
    Ok(processing_from_dual(p, dual, x, tol)?.coefficients.iter().map(|c| c.re).collect())
}

// ---- validate -------------------------------------------------------------

#[derive(Serialize, Deserialize)]
pub struct PovmReport {
    pub valid: bool,
    pub complete: bool,
    pub positive: bool,
    pub self_adjoint: bool,
    pub summary: String,
    pub defects: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcomes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub span_dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub infocomplete: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clean: Option<bool>,
}

fn povm_report(j: PovmJson, tol: &Tolerances) -> Result<PovmReport, Failure> {
    match j.into_povm(tol) {
        Ok(p) => Ok(PovmReport {
            valid: true,
            complete: true,
            positive: true,
            self_adjoint: true,
            summary: "complete, positive".into(),
            defects: Vec::new(),
            dim: Some(p.dim()),
            outcomes: Some(p.len()),
            span_dim: Some(p.span_dim(tol)),
            infocomplete: Some(is_infocomplete(&p, tol)),
            clean: Some(is_clean(&p, tol)),
        }),
        Err(Error::InvalidPovm(defects)) => {
            let complete = !defects.iter().any(|d| matches!(d, PovmDefect::NotComplete { .. }));
            let positive = !defects.iter().any(|d| matches!(d, PovmDefect::NotPositive { .. }));
            let self_adjoint = !defects.iter().any(|d| matches!(d, PovmDefect::NotSelfAdjoint { .. }));
            let summary = format!(
                "{}, {}",
                if complete { "complete" } else { "incomplete" },
                if positive && self_adjoint { "positive" } else { "not positive" }
            );
            Ok(PovmReport {
                valid: false,
                complete,
                positive,
                self_adjoint,
                summary,
                defects: defects.iter().map(ToString::to_string).collect(),
                dim: None,
                outcomes: None,
                span_dim: None,
                infocomplete: None,
                clean: None,
            })
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Serialize, Deserialize)]
pub struct ArtifactReport {
    pub artifact: String,
    pub version: String,
    pub consistent: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub povm: Option<PovmReport>,
}

fn parse_as<T: for<'de> Deserialize<'de>>(kind: &str, v: &Value) -> Result<T, Failure> {
    T::deserialize(v).map_err(|e| Failure::Parse(format!("`{kind}` artifact does not match its schema: {e}")))
}

fn validate_artifact(kind: &str, version: String, result: Value, tol: &Tolerances) -> Result<Output, Failure> {
    let mut povm = None;
    match kind {
        "povm" => povm = Some(povm_report(parse_as::<PovmJson>(kind, &result)?, tol)?),
        "dual" => {
            parse_as::<DualOut>(kind, &result)?;
        }
        "optimal-dual" => {
            parse_as::<OptimalDualOut>(kind, &result)?;
        }
        "min-error" => {
            parse_as::<MinErrorOut>(kind, &result)?;
        }
        "infocheck" => {
            parse_as::<InfoOut>(kind, &result)?;
        }
        "postproc-check" => {
            parse_as::<PostProcessingVerdict>(kind, &result)?;
        }
        "postproc-blur" => {
            let b = parse_as::<BlurResult>(kind, &result)?;
            povm = Some(povm_report(parse_as::<PovmJson>(kind, &serde_json::to_value(&b.blurred).expect("povm"))?, tol)?);
        }
        "postproc-joint" => {
            parse_as::<JointMeasurementVerdict>(kind, &result)?;
        }
        "ab-space" => {
            parse_as::<AbSpaceJson>(kind, &result)?.into_space(tol)?;
        }
        "ab-check" => {
            parse_as::<AbCheckOut>(kind, &result)?;
        }
        "qubit-sweep" => {
            parse_as::<SweepOut>(kind, &result)?;
        }
        "simulation" => {
            parse_as::<SimulateOut>(kind, &result)?;
        }
        "validation" => {
            parse_as::<Value>(kind, &result)?;
        }
        other => return Err(Failure::Parse(format!("unknown artifact kind `{other}`"))),
    }
    let invalid = povm.as_ref().is_some_and(|r| !r.valid);
    let report = ArtifactReport { artifact: kind.into(), version, consistent: !invalid, povm };
    Ok(Output::new("validation", &report, if invalid { Status::Invalid } else { Status::Ok }))
}

pub fn validate(file: &Path, s: &Settings) -> Result<Output, Failure> {
    let text = read_text(file)?;
    if let Some((meta, result)) = envelope_result(&text) {
        if meta.version != VERSION {
            log::warn!("artifact written by version {}, reading with {VERSION}", meta.version);
        }
        return validate_artifact(&meta.kind, meta.version, result, &s.tol);
    }
    let j: PovmJson = read_json(file)?;
    let report = povm_report(j, &s.tol)?;
    let status = if report.valid { Status::Ok } else { Status::Invalid };
    Ok(Output::new("validation", &report, status))
}

// ---- duals and errors -----------------------------------------------------

#[derive(Serialize, Deserialize)]
pub struct DualOut {
    pub dual: String,
    pub elements: Vec<Operator>,
    pub resolution_residual: f64,
    pub self_adjoint_deviation: f64,
}

pub fn dual(povm: &Path, y: Option<&PathBuf>, s: &Settings) -> Result<Output, Failure> {
    let p = load_povm(povm, &s.tol)?;
    let can = canonical_dual(&p, &s.tol);
    let (name, frame) = match y {
        Some(path) => ("alternate", alternate_dual(&p, &can, &load_operators(path)?)?),
        None => ("canonical", can),
    };
    let out = DualOut {
        dual: name.into(),
        resolution_residual: frame.resolution_residual(&p, &s.tol)?,
        self_adjoint_deviation: frame.max_self_adjoint_deviation(),
        elements: frame.elements,
    };
    Ok(Output::new("dual", &out, Status::Ok))
}

#[derive(Serialize, Deserialize)]
pub struct OptimalDualOut {
    pub elements: Vec<Operator>,
    /// `Tr[rho_E P_i]`.
    pub metric: Vec<f64>,
    pub resolution_residual: f64,
    pub self_adjoint_deviation: f64,
    pub min_norm_residual: f64,
    /// `max |Tr[D_i] - 1|` over outcomes with nonzero metric.
    pub trace_deviation: f64,
}

pub fn optimal(povm: &Path, ensemble: &str, s: &Settings) -> Result<Output, Failure> {
    let p = load_povm(povm, &s.tol)?;
    let e = load_ensemble(ensemble, p.dim(), &s.tol)?;
    let frame = optimal_dual(&p, &e, &s.tol)?;
    let metric = e.metric(&p).diag;
    let trace_deviation = frame
        .elements
        .iter()
        .zip(&metric)
        .filter(|(_, &w)| w > s.tol.eig_zero)
        .map(|(d, _)| (d.trace().re - 1.0).abs())
        .fold(0.0, f64::max);
    let out = OptimalDualOut {
        resolution_residual: frame.resolution_residual(&p, &s.tol)?,
        self_adjoint_deviation: frame.max_self_adjoint_deviation(),
        min_norm_residual: min_norm_residual(&p, &frame, &e),
        trace_deviation,
        metric,
        elements: frame.elements,
    };
    Ok(Output::new("optimal-dual", &out, Status::Ok))
}

#[derive(Serialize, Deserialize)]
pub struct MinErrorOut {
    pub min_error: f64,
    /// Optimal processing function `c_i = Tr[D_i X]`.
    pub coefficients: Vec<f64>,
    /// Ensemble error of `coefficients`, equal to `min_error` up to rounding.
    pub ensemble_error: f64,
}

pub fn min_err(povm: &Path, ensemble: &str, x: &Path, s: &Settings) -> Result<Output, Failure> {
    let p = load_povm(povm, &s.tol)?;
    let e = load_ensemble(ensemble, p.dim(), &s.tol)?;
    let x = load_self_adjoint(x, &s.tol)?;
    let value = min_error(&p, &e, &x, &s.tol)?;
    let frame = optimal_dual(&p, &e, &s.tol)?;
    let c = processing_from_dual(&p, &frame, &x, &s.tol)?;
    let out = MinErrorOut {
        min_error: value,
        ensemble_error: ensemble_error(&p, &c, &e, &s.tol)?,
        coefficients: c.coefficients.iter().map(|z| z.re).collect(),
    };
    Ok(Output::new("min-error", &out, Status::Ok))
}

#[derive(Serialize, Deserialize)]
pub struct InfoOut {
    pub dim: usize,
    pub outcomes: usize,
    pub span_dim: usize,
    pub infocomplete: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_infocomplete: Option<bool>,
}

pub fn infocheck(povm: &Path, r: Option<&PathBuf>, s: &Settings) -> Result<Output, Failure> {
    let p = load_povm(povm, &s.tol)?;
    let r_infocomplete = match r {
        Some(path) => Some(is_r_infocomplete(&p, &load_operators(path)?, &s.tol)?),
        None => None,
    };
    let out = InfoOut {
        dim: p.dim(),
        outcomes: p.len(),
        span_dim: p.span_dim(&s.tol),
        infocomplete: is_infocomplete(&p, &s.tol),
        r_infocomplete,
    };
    let positive = out.r_infocomplete.unwrap_or(out.infocomplete);
    Ok(Output::new("infocheck", &out, status_if(!positive)))
}

// ---- post-processing --------------------------------------------------------

pub fn postproc_check(q: &Path, p: &Path, s: &Settings) -> Result<Output, Failure> {
    let q = load_povm(q, &s.tol)?;
    let p = load_povm(p, &s.tol)?;
    let verdict = is_post_processing_of(&q, &p, &s.tol)?;
    Ok(Output::new("postproc-check", &verdict, status_if(!verdict.is_feasible())))
}

pub fn postproc_blur(p: &Path, q: &Path, ensemble: &str, s: &Settings) -> Result<Output, Failure> {
    let p = load_povm(p, &s.tol)?;
    let q = load_povm(q, &s.tol)?;
    let e = load_ensemble(ensemble, p.dim(), &s.tol)?;
    let blur = blur_for_post_processing(&p, &q, &e, &s.tol)?;
    Ok(Output::new("postproc-blur", &blur, Status::Ok))
}

pub fn postproc_joint(povm: &Path, xs: &[PathBuf], s: &Settings) -> Result<Output, Failure> {
    let p = load_povm(povm, &s.tol)?;
    let observables = xs
        .iter()
        .map(|x| Ok(Observable::new(load_self_adjoint(x, &s.tol)?, &s.tol)?))
        .collect::<Result<Vec<_>, Failure>>()?;
    let verdict = is_joint_measurement(&p, &observables, &s.tol)?;
    let negative = matches!(verdict, JointMeasurementVerdict::Infeasible { .. });
    Ok(Output::new("postproc-joint", &verdict, status_if(negative)))
}

// ---- AB-spaces ----------------------------------------------------------------

pub fn abspace_build(a: &Path, b: &Path, s: &Settings) -> Result<Output, Failure> {
    let a = Observable::new(load_self_adjoint(a, &s.tol)?, &s.tol)?;
    let b = Observable::new(load_self_adjoint(b, &s.tol)?, &s.tol)?;
    let space = ab_space(&a, &b, &s.tol)?;
    Ok(Output::new("ab-space", &AbSpaceJson::from(&space), Status::Ok))
}

#[derive(Serialize, Deserialize)]
pub struct AbCheckOut {
    #[serde(flatten)]
    pub verdict: AbVerdict,
    /// Projection of the elements onto the AB-space, when it applies.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projection: Option<Lemma1Outcome>,
}

pub fn abspace_check(space: &Path, povm: &Path, s: &Settings) -> Result<Output, Failure> {
    let space = read_json::<AbSpaceJson>(space)?.into_space(&s.tol)?;
    let p = load_povm(povm, &s.tol)?;
    let verdict = ab_verdict(&p, &space, &s.tol)?;
    let projection = if verdict.ab_infocomplete { Some(lemma1_projection(&p, &space, &s.tol)?) } else { None };
    let negative = !verdict.ab_infocomplete;
    Ok(Output::new("ab-check", &AbCheckOut { verdict, projection }, status_if(negative)))
}

// ---- qubit ----------------------------------------------------------------------

pub fn parse_family(s: &str) -> Result<Family, String> {
    match s {
        "3" | "three" => Ok(Family::Three),
        "4" | "four" => Ok(Family::Four),
        other => Err(format!("family must be 3 or 4, got `{other}`")),
    }
}

/// `a:b:n`, `n` equally spaced values from `a` to `b` inclusive.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(format!("expected a:b:n, got `{s}`"));
    };
    let a: f64 = a.parse().map_err(|e| format!("start: {e}"))?;
    let b: f64 = b.parse().map_err(|e| format!("end: {e}"))?;
    let n: usize = n.parse().map_err(|e| format!("count: {e}"))?;
    match n {
        0 => Err("count must be positive".into()),
        1 => Ok(vec![a]),
        _ => Ok((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()),
    }
}

#[derive(Serialize, Deserialize)]
pub struct QubitOptimalOut {
    pub dim: usize,
    pub elements: Vec<Operator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub theta: f64,
    pub family: Family,
    pub noise: NoiseSummary,
}

pub fn qubit_optimal(theta: f64, family: Family, ensemble: &str, s: &Settings) -> Result<Output, Failure> {
    let p = family.povm(theta, &s.tol)?;
    let e = load_ensemble(ensemble, 2, &s.tol)?;
    let noise = noise_quantities(&BlochPovm::from_povm(&p)?, &e, theta, &s.tol)?;
    let out = QubitOptimalOut {
        dim: p.dim(),
        elements: p.elements().to_vec(),
        labels: p.labels().map(<[String]>::to_vec),
        theta,
        family,
        noise,
    };
    Ok(Output::new("povm", &out, Status::Ok))
}

#[derive(Serialize, Deserialize)]
pub struct SweepOut {
    pub family: Family,
    pub rows: Vec<SweepRow>,
    #[serde(deserialize_with = "povmlab::tol::nullable_f64")]
    pub max_abs_gap: f64,
}

pub fn qubit_sweep(thetas: &[f64], family: Family, ensemble: &str, s: &Settings) -> Result<(Output, String), Failure> {
    let e = load_ensemble(ensemble, 2, &s.tol)?;
    let rows = sweep(thetas, family, &e, &s.tol)?;
    let max_abs_gap = rows.iter().map(|r| r.gap.abs()).fold(0.0, f64::max);
    let csv = sweep_csv(&rows)?;
    Ok((Output::new("qubit-sweep", &SweepOut { family, rows, max_abs_gap }, Status::Ok), csv))
}

/// 17 significant digits, enough to round-trip every double.
fn g17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

fn sweep_csv(rows: &[SweepRow]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Parse(format!("csv: {e}"));
    w.write_record(["theta", "B", "Gamma", "Delta", "total_error", "bound", "gap"]).map_err(io)?;
    for r in rows {
        w.write_record([r.theta, r.b, r.gamma, r.delta, r.total_error, r.bound, r.gap].map(g17)).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Parse(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("ascii csv"))
}

// ---- simulation -----------------------------------------------------------------

#[derive(Serialize, Deserialize)]
pub struct SimulateOut {
    /// `canonical`, or `optimal` when an ensemble was supplied.
    pub dual: String,
    pub coefficients: Vec<f64>,
    #[serde(flatten)]
    pub report: SimulationReport,
}

pub fn run_simulation(
    povm: &Path,
    state: &Path,
    x: &Path,
    n: u64,
    ensemble: Option<&str>,
    s: &Settings,
) -> Result<Output, Failure> {
    let p = load_povm(povm, &s.tol)?;
    let rho = load_state(state, &s.tol)?;
    let x = load_self_adjoint(x, &s.tol)?;
    if n == 0 {
        return Err(Failure::Validation("--n must be positive".into()));
    }
    let (name, frame) = match ensemble {
        Some(name) => ("optimal", optimal_dual(&p, &load_ensemble(name, p.dim(), &s.tol)?, &s.tol)?),
        None => ("canonical", canonical_dual(&p, &s.tol)),
    };
    let coefficients = real_parts(&p, &frame, &x, &s.tol)?;
    let report = simulate(&p, &rho, &coefficients, n, s.seed, &s.tol)?;
    Ok(Output::new("simulation", &SimulateOut { dual: name.into(), coefficients, report }, Status::Ok))
}

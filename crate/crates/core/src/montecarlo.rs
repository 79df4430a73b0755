//! Seeded Born-rule sampling and comparison of empirical estimates with
//! the predicted statistical error.
//!
//! Samples are drawn in fixed chunks of `CHUNK` outcomes; chunk `k` uses a
//! ChaCha8 generator seeded with the run seed on stream `k`. Counts are
//! therefore independent of the number of worker threads.

use log::warn;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hs::Operator;
use crate::postproc::MarkovMatrix;
use crate::povm::Povm;
use crate::processing::validate_state;
use crate::tol::Tolerances;

pub const GENERATOR: &str = "chacha8/stream-per-chunk/65536";
pub const CHUNK: u64 = 1 << 16;
const MARKOV_STREAM_BASE: u64 = 1 << 63;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRun {
    pub generator: String,
    pub seed: u64,
    pub n_ex: u64,
    pub counts: Vec<u64>,
}

impl SampleRun {
    pub fn frequencies(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.n_ex as f64).collect()
    }
}

/// `Tr[rho P_i]`; negatives within `psd_slack` are clamped and the vector
/// renormalized.
pub fn outcome_probabilities(p: &Povm, rho: &Operator, tol: &Tolerances) -> Result<Vec<f64>> {
    if rho.dim() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: rho.dim() });
    }
    validate_state(rho, tol)?;
    let probs = p.probabilities(rho);
    normalise(probs, tol)
}

fn normalise(mut probs: Vec<f64>, tol: &Tolerances) -> Result<Vec<f64>> {
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > tol.lin_solve {
        return Err(Error::InvalidParameter(format!("outcome probabilities sum to {total}")));
    }
    if let Some(&worst) = probs.iter().find(|&&v| v < -tol.psd_slack) {
        return Err(Error::InvalidParameter(format!("negative outcome probability {worst}")));
    }
    if probs.iter().any(|&v| v < 0.0) {
        warn!("clamping slightly negative outcome probabilities");
        for v in probs.iter_mut() {
            *v = v.max(0.0);
        }
    }
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|v| *v /= total);
    Ok(probs)
}

/// Multinomial counts of `n` draws from `probs` on streams
/// `stream_base + k`.
fn draw(probs: &[f64], n: u64, seed: u64, stream_base: u64) -> Vec<u64> {
    let k = probs.len();
    if n == 0 {
        return vec![0; k];
    }
    let dist = WeightedIndex::new(probs).expect("non-negative weights with positive sum");
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream_base + c);
            let len = CHUNK.min(n - c * CHUNK);
            let mut counts = vec![0u64; k];
            for _ in 0..len {
                counts[dist.sample(&mut rng)] += 1;
            }
            counts
        })
        .reduce(
            || vec![0u64; k],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

/// `n_ex` i.i.d. outcomes of `p` on `rho`.
pub fn sample(p: &Povm, rho: &Operator, n_ex: u64, seed: u64, tol: &Tolerances) -> Result<SampleRun> {
    if n_ex == 0 {
        return Err(Error::InvalidParameter("n_ex must be positive".into()));
    }
    let probs = outcome_probabilities(p, rho, tol)?;
    Ok(SampleRun { generator: GENERATOR.into(), seed, n_ex, counts: draw(&probs, n_ex, seed, 0) })
}

/// Routes each recorded outcome `i` to `j` with probability `m(j|i)`.
pub fn apply_markov(run: &SampleRun, m: &MarkovMatrix, seed: u64) -> Result<SampleRun> {
    if m.cols() != run.counts.len() {
        return Err(Error::LengthMismatch { expected: run.counts.len(), found: m.cols() });
    }
    let mut counts = vec![0u64; m.rows()];
    for (i, &n_i) in run.counts.iter().enumerate() {
        let column: Vec<f64> = (0..m.rows()).map(|j| m.get(j, i).max(0.0)).collect();
        let stream = MARKOV_STREAM_BASE + ((i as u64) << 32);
        for (j, c) in draw(&column, n_i, seed, stream).into_iter().enumerate() {
            counts[j] += c;
        }
    }
    Ok(SampleRun { generator: run.generator.clone(), seed, n_ex: run.n_ex, counts })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    /// Unbiased sample variance of the per-shot values `c_i`.
    pub variance: f64,
}

/// Mean and sample variance of the stream of processed outcomes.
pub fn empirical_estimate(run: &SampleRun, c: &[f64]) -> Result<Estimate> {
    if c.len() != run.counts.len() {
        return Err(Error::LengthMismatch { expected: run.counts.len(), found: c.len() });
    }
    let n = run.n_ex as f64;
    let mean = run.counts.iter().zip(c).map(|(&k, &v)| k as f64 * v).sum::<f64>() / n;
    let ss: f64 = run.counts.iter().zip(c).map(|(&k, &v)| k as f64 * (v - mean).powi(2)).sum();
    let variance = if run.n_ex > 1 { ss / (n - 1.0) } else { 0.0 };
    Ok(Estimate { mean, variance })
}

/// Exact per-shot moments of the processed outcome.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Prediction {
    pub mean: f64,
    /// `δ²_ρ = sum_i p_i c_i² - mean²`.
    pub variance: f64,
    /// `sum_i p_i (c_i - mean)^4`.
    pub fourth_central: f64,
}

pub fn predict(probs: &[f64], c: &[f64]) -> Result<Prediction> {
    if c.len() != probs.len() {
        return Err(Error::LengthMismatch { expected: probs.len(), found: c.len() });
    }
    let mean: f64 = probs.iter().zip(c).map(|(p, v)| p * v).sum();
    let variance = probs.iter().zip(c).map(|(p, v)| p * (v - mean).powi(2)).sum();
    let fourth_central = probs.iter().zip(c).map(|(p, v)| p * (v - mean).powi(4)).sum();
    Ok(Prediction { mean, variance, fourth_central })
}

fn ratio(diff: f64, sigma: f64) -> f64 {
    if sigma > 0.0 {
        diff / sigma
    } else if diff.abs() <= f64::EPSILON {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

impl Prediction {
    /// `(mean - μ) / (δ / sqrt(n - 1))`.
    pub fn mean_z(&self, est: &Estimate, n: u64) -> f64 {
        let se = (self.variance / (n.max(2) - 1) as f64).sqrt();
        ratio(est.mean - self.mean, se)
    }

    /// Standard error of the unbiased sample variance,
    /// `sqrt(μ4/n - δ⁴(n-3)/(n(n-1)))`.
    pub fn variance_standard_error(&self, n: u64) -> f64 {
        let n = n.max(2) as f64;
        let v = self.fourth_central / n - self.variance.powi(2) * (n - 3.0) / (n * (n - 1.0));
        v.max(0.0).sqrt()
    }

    /// Deviation of the sample variance in units of its standard error.
    pub fn variance_z(&self, est: &Estimate, n: u64) -> f64 {
        let se = self.variance_standard_error(n);
        ratio(est.variance - self.variance, se)
    }
}

/// Output of one simulated experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub generator: String,
    pub seed: u64,
    pub n: u64,
    pub counts: Vec<u64>,
    pub mean: f64,
    pub variance: f64,
    pub predicted_mean: f64,
    /// Predicted single-shot error `δ²_ρ(X)`.
    pub predicted_error: f64,
    #[serde(deserialize_with = "crate::tol::nullable_f64")]
    pub z_score: f64,
    #[serde(deserialize_with = "crate::tol::nullable_f64")]
    pub variance_z_score: f64,
}

/// Samples `p` on `rho` and processes the outcomes with `c`.
pub fn simulate(p: &Povm, rho: &Operator, c: &[f64], n: u64, seed: u64, tol: &Tolerances) -> Result<SimulationReport> {
    let run = sample(p, rho, n, seed, tol)?;
    let probs = outcome_probabilities(p, rho, tol)?;
    let pred = predict(&probs, c)?;
    let est = empirical_estimate(&run, c)?;
    Ok(SimulationReport {
        generator: run.generator,
        seed,
        n,
        mean: est.mean,
        variance: est.variance,
        predicted_mean: pred.mean,
        predicted_error: pred.variance,
        z_score: pred.mean_z(&est, n),
        variance_z_score: pred.variance_z(&est, n),
        counts: run.counts,
    })
}

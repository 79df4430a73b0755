use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};

/// Numerical thresholds shared by every routine in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Singular values below `eig_zero * s_max` count as zero.
    pub eig_zero: f64,
    /// Largest negative eigenvalue magnitude still accepted as positive.
    pub psd_slack: f64,
    /// Residual accepted for linear identities (completeness, duality, spans).
    pub lin_solve: f64,
    /// Eigenvalues closer than this are treated as one spectral value.
    pub cluster: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eig_zero: 1e-10,
            psd_slack: 1e-10,
            lin_solve: 1e-9,
            cluster: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<Self> {
        for (name, v) in [
            ("eig_zero", self.eig_zero),
            ("psd_slack", self.psd_slack),
            ("lin_solve", self.lin_solve),
            ("cluster", self.cluster),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "tolerance {name} must be strictly positive, got {v}"
                )));
            }
        }
        Ok(*self)
    }
}

/// Reads a number that JSON writers emit as `null` when it is not finite.
pub fn nullable_f64<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

//! Tolerance and seed resolution: command-line flags override the config
//! file, which overrides the built-in defaults.

use std::path::Path;

use povmlab::Tolerances;

use crate::io::Failure;

#[derive(Debug, Default, Clone, Copy, PartialEq)]
pub struct Overrides {
    pub eig_zero: Option<f64>,
    pub psd_slack: Option<f64>,
    pub lin_solve: Option<f64>,
    pub cluster: Option<f64>,
    pub seed: Option<u64>,
}

impl Overrides {
    fn layer(self, over: Overrides) -> Overrides {
        Overrides {
            eig_zero: over.eig_zero.or(self.eig_zero),
            psd_slack: over.psd_slack.or(self.psd_slack),
            lin_solve: over.lin_solve.or(self.lin_solve),
            cluster: over.cluster.or(self.cluster),
            seed: over.seed.or(self.seed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub tol: Tolerances,
    pub seed: u64,
}

/// Parses `key = value` lines; `#` starts a comment. Keys may carry a
/// `tol.` prefix (`tol.eig_zero`) or use dashes (`eig-zero`).
pub fn parse_config(text: &str, origin: &str) -> Result<Overrides, Failure> {
    let mut out = Overrides::default();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = |msg: String| Failure::Parse(format!("{origin}:{}: {msg}", n + 1));
        let (key, value) = line.split_once('=').ok_or_else(|| at(format!("expected key = value, got `{line}`")))?;
        let key = key.trim().trim_start_matches("tol.").replace('-', "_");
        let value = value.trim();
        let real = || value.parse::<f64>().map_err(|e| at(format!("{key}: {e}")));
        match key.as_str() {
            "eig_zero" => out.eig_zero = Some(real()?),
            "psd_slack" => out.psd_slack = Some(real()?),
            "lin_solve" => out.lin_solve = Some(real()?),
            "cluster" => out.cluster = Some(real()?),
            "seed" => out.seed = Some(value.parse().map_err(|e| at(format!("seed: {e}")))?),
            other => return Err(at(format!("unknown key `{other}`"))),
        }
    }
    Ok(out)
}

pub fn resolve(config: Option<&Path>, flags: Overrides) -> Result<Settings, Failure> {
    let file = match config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
            parse_config(&text, &path.display().to_string())?
        }
        None => Overrides::default(),
    };
    let merged = file.layer(flags);
    let d = Tolerances::default();
    let tol = Tolerances {
        eig_zero: merged.eig_zero.unwrap_or(d.eig_zero),
        psd_slack: merged.psd_slack.unwrap_or(d.psd_slack),
        lin_solve: merged.lin_solve.unwrap_or(d.lin_solve),
        cluster: merged.cluster.unwrap_or(d.cluster),
    }
    .validate()
    .map_err(|e| Failure::Validation(e.to_string()))?;
    Ok(Settings { tol, seed: merged.seed.unwrap_or(0) })
}

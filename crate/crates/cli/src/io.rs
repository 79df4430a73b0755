//! JSON input with positioned diagnostics, the metadata envelope written
//! around every artifact, and the exit-code classification.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use povmlab::Tolerances;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const TOOL: &str = "povmlab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
pub enum Failure {
    /// Unreadable or malformed input. Exit code 1.
    Parse(String),
    /// Input parsed but violates a precondition. Exit code 2.
    Validation(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Parse(_) => 1,
            Failure::Validation(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Parse(m) => write!(f, "parse error: {m}"),
            Failure::Validation(m) => write!(f, "validation error: {m}"),
        }
    }
}

impl From<povmlab::Error> for Failure {
    fn from(e: povmlab::Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    /// Artifact type, used when the file is read back.
    pub kind: String,
    pub tolerances: Tolerances,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
pub struct Envelope<T> {
    pub metadata: Metadata,
    pub result: T,
}

impl Metadata {
    pub fn new(kind: &str, tol: Tolerances, seed: u64) -> Self {
        Metadata { tool: TOOL.into(), version: VERSION.into(), kind: kind.into(), tolerances: tol, seed }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn positioned(path: &Path, e: &serde_json::Error) -> Failure {
    Failure::Parse(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column()))
}

/// The `result` of an envelope, or `None` when the document is not one.
pub fn envelope_result(text: &str) -> Option<(Metadata, Value)> {
    let env: Envelope<Value> = serde_json::from_str(text).ok()?;
    Some((env.metadata, env.result))
}

/// Parses `path` as `T`, either directly or as the `result` of an
/// artifact previously written by this tool. `pick` selects the field of an
/// artifact result that holds the `T` (for example `blurred`).
pub fn read_json_from<T: DeserializeOwned>(path: &Path, pick: &[&str]) -> Result<T, Failure> {
    let text = read(path)?;
    let direct = serde_json::from_str::<T>(&text);
    let err = match direct {
        Ok(v) => return Ok(v),
        Err(e) => e,
    };
    if let Some((_, result)) = envelope_result(&text) {
        let candidates = std::iter::once(&result).chain(pick.iter().filter_map(|k| result.get(*k)));
        let mut last = None;
        for c in candidates {
            match T::deserialize(c) {
                Ok(v) => return Ok(v),
                Err(e) => last = Some(e),
            }
        }
        if let Some(e) = last {
            return Err(Failure::Parse(format!("{}: artifact result: {e}", path.display())));
        }
    }
    Err(positioned(path, &err))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    read_json_from(path, &[])
}

pub fn read_text(path: &Path) -> Result<String, Failure> {
    read(path)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable artifact");
    s.push('\n');
    s
}

/// Writes to `out`, or to stdout when `out` is `None`.
pub fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Parse(format!("stdout: {e}")))
        }
    }
}

//! Scenario files: the JSON input format shared by `optimize`, `sweep`, and
//! `fuse`.
//!
//! ```json
//! {
//!   "n": 2,
//!   "P1d": [1.0, 0.0, 0.0, 1.0],
//!   "P1i": [0.5, 0.0, 0.0, 0.5],
//!   "P2d": [1.0, 0.0, 0.0, 1.0],
//!   "P2i": [0.5, 0.0, 0.0, 0.5],
//!   "x1": [0.0, 0.0],
//!   "x2": [1.0, 1.0]
//! }
//! ```
//!
//! Matrices are `n*n` reals, row-major. `x1`/`x2` are optional except for
//! `fuse`. Validation failures name the offending field.

use std::fmt;
use std::path::Path;

use nalgebra::DVector;
use serde::Deserialize;
use splitci::{SplitCiError, SplitPair, SymMatrix};

use crate::exit;

/// Command-level error carrying its process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Malformed flags or input files (exit 2).
    Input(String),
    /// Numerical failure while computing on validated inputs (exit 3).
    Numerical(String),
    /// The verification suite found a residual out of tolerance (exit 1).
    VerifyFailed,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => exit::INPUT_ERROR,
            CliError::Numerical(_) => exit::NUMERICAL_ERROR,
            CliError::VerifyFailed => exit::VERIFY_FAILED,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(msg) => write!(f, "{msg}"),
            CliError::Numerical(msg) => write!(f, "{msg}"),
            CliError::VerifyFailed => write!(f, "verification failed"),
        }
    }
}

/// Map a core error that occurs *after* input validation (exit 3).
pub fn numerical(err: SplitCiError) -> CliError {
    CliError::Numerical(err.to_string())
}

#[derive(Debug, Deserialize)]
pub struct ScenarioFile {
    pub n: usize,
    #[serde(rename = "P1d")]
    pub p1d: Vec<f64>,
    #[serde(rename = "P1i")]
    pub p1i: Vec<f64>,
    #[serde(rename = "P2d")]
    pub p2d: Vec<f64>,
    #[serde(rename = "P2i")]
    pub p2i: Vec<f64>,
    #[serde(default)]
    pub x1: Option<Vec<f64>>,
    #[serde(default)]
    pub x2: Option<Vec<f64>>,
}

/// A parsed and validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub pair: SplitPair,
    pub x1: Option<DVector<f64>>,
    pub x2: Option<DVector<f64>>,
}

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let file: ScenarioFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    validate(file)
}

fn validate(file: ScenarioFile) -> Result<Scenario, CliError> {
    let n = file.n;
    if n == 0 {
        return Err(CliError::Input("n: must be at least 1".into()));
    }
    let expected = n * n;
    let matrix = |name: &str, data: &[f64]| -> Result<SymMatrix, CliError> {
        if data.len() != expected {
            return Err(CliError::Input(format!(
                "{name}: expected {expected} entries for n={n}, got {}",
                data.len()
            )));
        }
        SymMatrix::new(n, data).map_err(|e| CliError::Input(format!("{name}: {e}")))
    };
    let p1d = matrix("P1d", &file.p1d)?;
    let p1i = matrix("P1i", &file.p1i)?;
    let p2d = matrix("P2d", &file.p2d)?;
    let p2i = matrix("P2i", &file.p2i)?;
    let pair = SplitPair::new(p1d, p1i, p2d, p2i).map_err(|e| CliError::Input(e.to_string()))?;

    let mean = |name: &str, data: Option<Vec<f64>>| -> Result<Option<DVector<f64>>, CliError> {
        match data {
            None => Ok(None),
            Some(v) if v.len() == n => Ok(Some(DVector::from_row_slice(&v))),
            Some(v) => Err(CliError::Input(format!(
                "{name}: expected {n} entries, got {}",
                v.len()
            ))),
        }
    };
    let x1 = mean("x1", file.x1)?;
    let x2 = mean("x2", file.x2)?;
    Ok(Scenario { pair, x1, x2 })
}

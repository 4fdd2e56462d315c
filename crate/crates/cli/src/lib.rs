//! Experiment drivers behind the `kirchhoff` binary.
//!
//! Each subcommand reads its table of a [`Config`], runs, writes its files
//! into the output directory and returns a serializable summary. Failures
//! carry the process exit code.

pub mod config;
pub mod measure;
pub mod oracle;
pub mod output;
pub mod resonance;
pub mod roundtrip;
pub mod simulate;
pub mod sweep;
pub mod verify;

pub use config::Config;

use std::fmt;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Failure {
    Io = 1,
    Config = 2,
    Numerical = 3,
    Sampling = 4,
    Verification = 5,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: Failure,
    pub message: String,
}

impl CliError {
    pub fn new(kind: Failure, message: impl Into<String>) -> Self {
        CliError { kind, message: message.into() }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(Failure::Config, message)
    }

    pub fn code(&self) -> i32 {
        self.kind as i32
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for CliError {}

impl From<kirchhoff_core::Error> for CliError {
    fn from(e: kirchhoff_core::Error) -> Self {
        use kirchhoff_core::Error as E;
        let kind = match e {
            E::Domain(_) | E::TooMany { .. } => Failure::Config,
            E::Numerical { .. } | E::NearZeroDivisor { .. } => Failure::Numerical,
            E::Sampling(_) => Failure::Sampling,
            E::Structure(_) => Failure::Verification,
        };
        CliError::new(kind, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new(Failure::Io, e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::new(Failure::Io, e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::new(Failure::Io, e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Least-squares line y = intercept + slope x.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// standard error of the slope; absent with fewer than three points
    pub slope_se: Option<f64>,
    pub r2: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope_se = (n > 2).then(|| (ss_res / (nf - 2.0) / sxx).sqrt());
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Some(LineFit { slope, intercept, slope_se, r2 })
}

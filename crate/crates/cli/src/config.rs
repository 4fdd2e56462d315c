//! Experiment configuration: one TOML file with a table per subcommand.
//!
//! Unknown keys are rejected. Values can be overridden from the command line
//! with `--set table.key=value`, where `value` is a TOML literal; bare words
//! are taken as strings.

use crate::{CliError, Result};
use kirchhoff_core::simulator::Scheme;
use kirchhoff_core::WeightSpec;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    /// Output directory; not part of the embedded header so reruns elsewhere compare equal.
    #[serde(skip_serializing)]
    pub out: PathBuf,
    /// Worker threads; defaults to rayon's choice.
    #[serde(skip_serializing)]
    pub threads: Option<usize>,
    pub simulate: SimulateConfig,
    pub drift_sweep: DriftSweepConfig,
    pub nf_verify: NfVerifyConfig,
    pub measure: MeasureConfig,
    pub resonance: ResonanceConfig,
    pub roundtrip: RoundtripConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 0,
            out: PathBuf::from("out"),
            threads: None,
            simulate: SimulateConfig::default(),
            drift_sweep: DriftSweepConfig::default(),
            nf_verify: NfVerifyConfig::default(),
            measure: MeasureConfig::default(),
            resonance: ResonanceConfig::default(),
            roundtrip: RoundtripConfig::default(),
        }
    }
}

/// Real initial datum (u_a, v_a) on one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeValue {
    pub a: u32,
    #[serde(default)]
    pub u: f64,
    #[serde(default)]
    pub v: f64,
}

/// Complex z_a on one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZValue {
    pub a: u32,
    #[serde(default)]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Initial {
    /// Explicit (u_a, v_a); unlisted modes are zero.
    Modes { modes: Vec<ModeValue> },
    /// eps times a draw from the Gaussian measure, taken in z coordinates.
    Measure { eps: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(rename = "M")]
    pub m: usize,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub scheme: Scheme,
    pub record_stride: usize,
    pub weight: WeightSpec,
    pub linearized: bool,
    pub allow_coarse_dt: bool,
    pub init: Initial,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            m: 16,
            dt: 1e-3,
            t_final: 10.0,
            scheme: Scheme::StrangSplit,
            record_stride: 100,
            weight: WeightSpec::sobolev(3.0),
            linearized: false,
            allow_coarse_dt: false,
            init: Initial::Modes { modes: vec![ModeValue { a: 1, u: 0.1, v: 0.0 }] },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriftSweepConfig {
    pub eps: Vec<f64>,
    pub r: u32,
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(rename = "M")]
    pub m: usize,
    pub gamma: f64,
    pub weight: WeightSpec,
    /// nonresonant initial data per eps
    pub samples: usize,
    /// measure draws scanned per eps before giving up
    pub max_draws: u64,
    pub dt: f64,
    /// T = t_factor * eps^(-t_exponent)
    pub t_exponent: f64,
    pub t_factor: f64,
    pub record_stride: usize,
    pub scheme: Scheme,
}

impl Default for DriftSweepConfig {
    fn default() -> Self {
        DriftSweepConfig {
            eps: vec![0.2, 0.1, 0.05],
            r: 2,
            n: 16,
            m: 16,
            gamma: 1e-3,
            weight: WeightSpec::sobolev(3.0),
            samples: 6,
            max_draws: 10_000,
            dt: 5e-3,
            t_exponent: 2.0,
            t_factor: 1.0,
            record_stride: 10,
            scheme: Scheme::StrangSplit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NfVerifyConfig {
    /// cutoff for the rational checks and the golden files
    #[serde(rename = "N")]
    pub n: u32,
    /// cutoff for the exact K5 table check
    pub k5_n: u32,
    pub r: u32,
    pub gamma: f64,
    pub eps: f64,
    pub weight: WeightSpec,
    pub points: usize,
    pub septic_points: usize,
    pub flow_points: usize,
    pub flow_steps: usize,
    /// the Z3 + Z5 normal form has ~5e4 terms, so it is flowed on fewer points
    pub z3z5_flow_points: usize,
    pub z3z5_flow_steps: usize,
    pub quintic_tol: f64,
    pub septic_tol: f64,
    pub flow_tol: f64,
    /// directory of golden files to compare against
    pub golden: Option<PathBuf>,
}

impl Default for NfVerifyConfig {
    fn default() -> Self {
        NfVerifyConfig {
            n: 6,
            k5_n: 8,
            r: 2,
            gamma: 1e-3,
            eps: 0.1,
            weight: WeightSpec::sobolev(3.0),
            points: 100,
            septic_points: 50,
            flow_points: 5,
            flow_steps: 1000,
            z3z5_flow_points: 1,
            z3z5_flow_steps: 200,
            quintic_tol: 1e-10,
            septic_tol: 1e-9,
            flow_tol: 1e-9,
            golden: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasureConfig {
    pub r: u32,
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(rename = "M")]
    pub m: usize,
    pub gammas: Vec<f64>,
    pub samples: usize,
    pub weight: WeightSpec,
    pub ball_radius: f64,
    /// defaults to just inside the small-data hypothesis at the smallest gamma
    pub eps: Option<f64>,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        MeasureConfig {
            r: 2,
            n: 8,
            m: 8,
            gammas: vec![0.02, 0.05, 0.1, 0.2],
            samples: 10_000,
            weight: WeightSpec::sobolev(3.0),
            ball_radius: 0.5,
            eps: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResonanceConfig {
    pub r: u32,
    #[serde(rename = "N")]
    pub n: u32,
    pub gamma: f64,
    pub weight: WeightSpec,
    pub z: Vec<ZValue>,
}

impl Default for ResonanceConfig {
    fn default() -> Self {
        ResonanceConfig { r: 2, n: 8, gamma: 1e-3, weight: WeightSpec::sobolev(3.0), z: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoundtripConfig {
    #[serde(rename = "M")]
    pub m: usize,
    pub states: usize,
    /// bound on ||u||_{3/2}^2 + ||v||_{1/2}^2
    pub radius: f64,
    pub tol: f64,
}

impl Default for RoundtripConfig {
    fn default() -> Self {
        RoundtripConfig { m: 16, states: 1000, radius: 1.0, tol: 1e-12 }
    }
}

fn parse_value(raw: &str) -> toml::Value {
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("key just parsed"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Applies `path.to.key=value` to a TOML table.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("override `{spec}` is not of the form key=value")))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::config(format!("bad key path `{path}`")));
    }
    let mut cur = table;
    for k in &keys[..keys.len() - 1] {
        let entry = cur.entry(k.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| CliError::config(format!("`{k}` in `{path}` is not a table")))?;
    }
    cur.insert(keys[keys.len() - 1].to_string(), parse_value(raw.trim()));
    Ok(())
}

impl Config {
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Config> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| CliError::config(format!("config: {e}")))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        table.try_into().map_err(|e| CliError::config(format!("config: {e}")))
    }

    /// Reads the file (if any) and applies the overrides.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Config> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| CliError::config(format!("cannot read {}: {e}", p.display())))?,
            None => String::new(),
        };
        Config::from_toml(&text, overrides)
    }
}

pub(crate) fn check(ok: bool, what: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::config(what()))
    }
}

pub(crate) fn positive(x: f64, name: &str) -> Result<()> {
    check(x > 0.0 && x.is_finite(), || format!("{name} = {x} must be positive and finite"))
}

pub(crate) fn weight(w: &WeightSpec) -> Result<()> {
    w.validate().map_err(CliError::from)
}

impl SimulateConfig {
    pub fn validate(&self) -> Result<()> {
        check(self.m >= 1, || "simulate.M must be >= 1".into())?;
        weight(&self.weight)?;
        match &self.init {
            Initial::Modes { modes } => {
                for v in modes {
                    check(v.a >= 1 && v.a as usize <= self.m, || format!("mode {} outside 1..={}", v.a, self.m))?;
                    check(v.u.is_finite() && v.v.is_finite(), || format!("mode {} is not finite", v.a))?;
                }
            }
            Initial::Measure { eps } => positive(*eps, "simulate.init.eps")?,
        }
        Ok(())
    }
}

impl DriftSweepConfig {
    pub fn validate(&self) -> Result<()> {
        check(self.eps.len() >= 2, || "drift_sweep.eps needs at least two values".into())?;
        for &e in &self.eps {
            positive(e, "drift_sweep.eps")?;
        }
        check(self.samples >= 1, || "drift_sweep.samples must be >= 1".into())?;
        check(self.m >= self.n as usize, || "drift_sweep.M must be >= N".into())?;
        positive(self.t_factor, "drift_sweep.t_factor")?;
        check(self.t_exponent.is_finite(), || "drift_sweep.t_exponent must be finite".into())?;
        weight(&self.weight)
    }
}

impl NfVerifyConfig {
    pub fn validate(&self) -> Result<()> {
        check((1..=12).contains(&self.n), || format!("nf_verify.N = {} outside 1..=12", self.n))?;
        check((1..=12).contains(&self.k5_n), || format!("nf_verify.k5_n = {} outside 1..=12", self.k5_n))?;
        positive(self.eps, "nf_verify.eps")?;
        for (t, name) in [(self.quintic_tol, "quintic_tol"), (self.septic_tol, "septic_tol"), (self.flow_tol, "flow_tol")] {
            positive(t, name)?;
        }
        check(self.flow_steps >= 1 && self.z3z5_flow_steps >= 1, || "nf_verify flow steps must be >= 1".into())?;
        weight(&self.weight)
    }
}

impl MeasureConfig {
    pub fn validate(&self) -> Result<()> {
        check(!self.gammas.is_empty(), || "measure.gammas is empty".into())?;
        for &g in &self.gammas {
            check(g > 0.0 && g < 1.0, || format!("gamma = {g} must lie in (0, 1)"))?;
        }
        check(self.samples >= 1 && self.m >= self.n as usize, || "measure needs samples >= 1 and M >= N".into())?;
        if let Some(e) = self.eps {
            positive(e, "measure.eps")?;
        }
        positive(self.ball_radius, "measure.ball_radius")?;
        weight(&self.weight)
    }
}

impl RoundtripConfig {
    pub fn validate(&self) -> Result<()> {
        check(self.m >= 1 && self.states >= 1, || "roundtrip needs M >= 1 and states >= 1".into())?;
        positive(self.radius, "roundtrip.radius")?;
        positive(self.tol, "roundtrip.tol")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(Config::from_toml("", &[]).unwrap(), Config::default());
    }

    #[test]
    fn overrides_reach_nested_tables() {
        let c = Config::from_toml(
            "seed = 3\n[simulate]\nT = 1.0\n",
            &["simulate.T=2.5".into(), "measure.weight={kind=\"gevrey\", rho=0.5, theta=0.5}".into()],
        )
        .unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.simulate.t_final, 2.5);
        assert_eq!(c.measure.weight, WeightSpec::gevrey(0.5, 0.5));
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        let e = Config::from_toml("[simulate]\nsteps = 3\n", &[]).unwrap_err();
        assert_eq!(e.code(), 2);
        assert_eq!(Config::from_toml("", &["nonsense".into()]).unwrap_err().code(), 2);
    }

    #[test]
    fn modes_and_measure_initial_data() {
        let c = Config::from_toml("[simulate.init]\nkind = \"measure\"\neps = 0.1\n", &[]).unwrap();
        assert_eq!(c.simulate.init, Initial::Measure { eps: 0.1 });
        let c = Config::from_toml("[simulate.init]\nkind = \"modes\"\nmodes = [{a = 2, v = 1.0}]\n", &[]).unwrap();
        assert_eq!(c.simulate.init, Initial::Modes { modes: vec![ModeValue { a: 2, u: 0.0, v: 1.0 }] });
    }

    #[test]
    fn validation_catches_bad_values() {
        let mut c = Config::default();
        c.simulate.init = Initial::Modes { modes: vec![ModeValue { a: 40, u: 1.0, v: 0.0 }] };
        assert!(c.simulate.validate().is_err());
        c.measure.gammas = vec![1.5];
        assert!(c.measure.validate().is_err());
        c.drift_sweep.eps = vec![0.1];
        assert!(c.drift_sweep.validate().is_err());
    }
}

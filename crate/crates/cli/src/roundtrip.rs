//! `roundtrip`: uv -> psi -> eta -> z -> eta -> psi -> uv on random states,
//! and the scalar identity Q(eta) = Q(psi) sqrt(1 + 2 Q(psi)).

use crate::config::Config;
use crate::output::write_json;
use crate::{CliError, Failure, Result};
use kirchhoff_core::transforms::{compute_q, eta_to_psi, eta_to_z, psi_to_eta, psi_to_uv, uv_to_psi, z_to_eta, UVState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundtripReport {
    pub states: usize,
    /// max per-coefficient |u - u'|, |v - v'|
    pub max_error: f64,
    pub max_q_error: f64,
    pub max_norm: f64,
    pub tol: f64,
    pub passed: bool,
}

/// State number `index` of the run: uniform coefficients decaying like
/// a^-2, rescaled so ||u||_{3/2}^2 + ||v||_{1/2}^2 is uniform in [0, radius].
pub fn random_state(seed: u64, index: u64, m: usize, radius: f64) -> UVState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut draw = |i: usize| rng.random_range(-1.0..1.0) / ((i + 1) as f64).powi(2);
    let u: Vec<f64> = (0..m).map(&mut draw).collect();
    let v: Vec<f64> = (0..m).map(&mut draw).collect();
    let st = UVState::new(u, v);
    let target = radius * rng.random_range(0.0..1.0);
    let now = st.sobolev_sq(1.0);
    if now == 0.0 {
        return st;
    }
    let c = (target / now).sqrt();
    UVState::new(st.u.iter().map(|x| x * c).collect(), st.v.iter().map(|x| x * c).collect())
}

/// (coefficient error, Q-identity error) of one state.
pub fn chain_error(st: &UVState) -> Result<(f64, f64)> {
    let psi = uv_to_psi(st);
    let eta = psi_to_eta(&psi);
    let z = eta_to_z(&eta);
    let back = psi_to_uv(&eta_to_psi(&z_to_eta(&z))?);
    let qp = compute_q(&psi);
    let q_err = (eta.q - qp * (1.0 + 2.0 * qp).sqrt()).abs();
    Ok((st.max_abs_diff(&back), q_err))
}

pub fn run(cfg: &Config) -> Result<RoundtripReport> {
    let rc = &cfg.roundtrip;
    rc.validate()?;
    let per: Vec<(f64, f64, f64)> = (0..rc.states as u64)
        .into_par_iter()
        .map(|i| {
            let st = random_state(cfg.seed, i, rc.m, rc.radius);
            let (e, q) = chain_error(&st)?;
            Ok((e, q, st.sobolev_sq(1.0)))
        })
        .collect::<Result<_>>()?;
    let max = |k: fn(&(f64, f64, f64)) -> f64| per.iter().map(k).fold(0.0, f64::max);
    let (max_error, max_q_error) = (max(|p| p.0), max(|p| p.1));
    let report = RoundtripReport {
        states: rc.states,
        max_error,
        max_q_error,
        max_norm: max(|p| p.2),
        tol: rc.tol,
        passed: max_error <= rc.tol && max_q_error <= rc.tol,
    };
    write_json(&cfg.out, "roundtrip.json", "roundtrip", cfg, &report)?;
    if report.passed {
        Ok(report)
    } else {
        Err(CliError::new(
            Failure::Verification,
            format!("roundtrip error {max_error:e}, Q identity error {max_q_error:e} above {:e}", rc.tol),
        ))
    }
}

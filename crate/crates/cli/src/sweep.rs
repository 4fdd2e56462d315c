//! `drift-sweep`: action drift of nonresonant small data against eps.
//!
//! For each eps the same measure stream is scanned for data eps z in
//! U_gamma^N, each datum is integrated to T = t_factor eps^(-t_exponent), and
//! D(eps) is the largest sup_a w(a)^2 |I_a(t) - I_a(0)| over all samples and
//! recorded times. log D is fitted against log eps.

use crate::config::Config;
use crate::output::{write_csv, write_json};
use crate::{fit_line, CliError, LineFit, Result};
use kirchhoff_core::divisors::NonResonanceParams;
use kirchhoff_core::measure::{eps_hypothesis, sample_nonresonant, MeasureSpec};
use kirchhoff_core::simulator::{simulate, SimConfig};
use kirchhoff_core::transforms::{z_to_uv, ZState};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// One simulated datum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub eps: f64,
    pub sample: usize,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub drift: f64,
    pub norm_ratio: f64,
    pub energy_drift: f64,
}

/// Aggregate over the samples of one eps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsRecord {
    pub eps: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    /// D(eps), max over samples and time
    pub drift: f64,
    pub drift_min: f64,
    pub norm_ratio_max: f64,
    pub samples: usize,
    pub hypothesis_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub records: Vec<EpsRecord>,
    /// fit of log D against log eps
    pub fit: Option<LineFit>,
    pub norm_ratio_max: f64,
    pub points: Vec<SweepPoint>,
}

pub fn run(cfg: &Config) -> Result<SweepReport> {
    let dc = &cfg.drift_sweep;
    dc.validate()?;
    let params = NonResonanceParams::new(dc.r, dc.n, dc.gamma, dc.weight);
    let spec = MeasureSpec::new(dc.weight, dc.m, 1, cfg.seed);

    let mut jobs = Vec::new();
    for &eps in &dc.eps {
        let zs = sample_nonresonant(&params, &spec, eps, dc.samples, dc.max_draws).map_err(|e| {
            let mut err = CliError::from(e);
            err.message = format!("eps = {eps}: {} (gamma = {}, N = {}, r = {})", err.message, dc.gamma, dc.n, dc.r);
            err
        })?;
        jobs.extend(zs.into_iter().enumerate().map(|(i, z)| (eps, i, z)));
    }

    let points = jobs
        .par_iter()
        .map(|(eps, i, z)| -> Result<SweepPoint> {
            let t = dc.t_factor * eps.powf(-dc.t_exponent);
            let mut sim = SimConfig::new(dc.dt, t, dc.scheme);
            sim.record_stride = dc.record_stride;
            sim.weight = dc.weight;
            let tr = simulate(&z_to_uv(&ZState(z.clone()))?, &sim)?;
            Ok(SweepPoint {
                eps: *eps,
                sample: *i,
                t_final: t,
                drift: tr.max_sup_drift(),
                norm_ratio: tr.max_norm_ratio(),
                energy_drift: tr.max_energy_drift(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let records: Vec<EpsRecord> = dc
        .eps
        .iter()
        .map(|&eps| {
            let mine: Vec<&SweepPoint> = points.iter().filter(|p| p.eps == eps).collect();
            EpsRecord {
                eps,
                t_final: mine[0].t_final,
                drift: mine.iter().map(|p| p.drift).fold(0.0, f64::max),
                drift_min: mine.iter().map(|p| p.drift).fold(f64::INFINITY, f64::min),
                norm_ratio_max: mine.iter().map(|p| p.norm_ratio).fold(0.0, f64::max),
                samples: mine.len(),
                hypothesis_holds: eps_hypothesis(&params, eps),
            }
        })
        .collect();

    let usable: Vec<&EpsRecord> = records.iter().filter(|r| r.drift > 0.0).collect();
    let fit = fit_line(
        &usable.iter().map(|r| r.eps.ln()).collect::<Vec<_>>(),
        &usable.iter().map(|r| r.drift.ln()).collect::<Vec<_>>(),
    );
    let report = SweepReport {
        norm_ratio_max: records.iter().map(|r| r.norm_ratio_max).fold(0.0, f64::max),
        records,
        fit,
        points,
    };

    let cols: Vec<String> = ["eps", "sample", "T", "D", "norm_ratio", "energy_drift"].iter().map(|s| s.to_string()).collect();
    let rows: Vec<Vec<f64>> = report
        .points
        .iter()
        .map(|p| vec![p.eps, p.sample as f64, p.t_final, p.drift, p.norm_ratio, p.energy_drift])
        .collect();
    write_csv(&cfg.out, "drift_sweep.csv", "drift-sweep", cfg, &cols, &rows)?;
    write_json(&cfg.out, "drift_sweep.json", "drift-sweep", cfg, &report)?;
    Ok(report)
}

//! `measure`: fraction of sampled data in U_gamma^N over a gamma grid, one
//! shared sample set for all gammas.

use crate::config::Config;
use crate::output::write_json;
use crate::Result;
use kirchhoff_core::divisors::{enumerate_irr_indices, NonResonanceParams};
use kirchhoff_core::measure::{estimate_measure_grid, tail_threshold, MeasureRecord, MeasureSpec, TailKind};
use serde::{Deserialize, Serialize};

/// Fit of the complement fraction c(gamma) = lambda gamma through the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OriginFit {
    pub lambda: f64,
    /// uncentered R^2 = 1 - SS_res / sum c^2; absent when every complement is zero
    pub r2: Option<f64>,
    pub note: Option<String>,
}

pub fn fit_through_origin(x: &[f64], y: &[f64]) -> OriginFit {
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let syy: f64 = y.iter().map(|v| v * v).sum();
    let lambda = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    if syy == 0.0 {
        return OriginFit {
            lambda,
            r2: None,
            note: Some("every complement fraction is zero; the fit is degenerate".into()),
        };
    }
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - lambda * a).powi(2)).sum();
    OriginFit { lambda, r2: Some(1.0 - ss_res / syy), note: None }
}

/// Smallest and largest Omega^(2) and Omega^(4)-tilde thresholds over the
/// enumerated indices of one length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRange {
    pub gamma: f64,
    pub length: usize,
    pub omega2: [f64; 2],
    pub omega4: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub eps: f64,
    pub records: Vec<MeasureRecord>,
    pub fit: OriginFit,
    pub monotone: bool,
    pub thresholds: Vec<ThresholdRange>,
}

/// Just inside eps^2 <= 2 gamma / ((r + 1) N^(4r + 2)).
pub fn default_eps(r: u32, n: u32, gamma: f64) -> f64 {
    0.999 * (2.0 * gamma / ((r as f64 + 1.0) * (n as f64).powf(4.0 * r as f64 + 2.0))).sqrt()
}

fn thresholds(params: &NonResonanceParams, eps: f64) -> Result<Vec<ThresholdRange>> {
    let idx = enumerate_irr_indices(params.r, params.n)?;
    let mut out = Vec::new();
    for length in 2..=params.r as usize * 2 {
        let mut o2 = [f64::INFINITY, 0.0];
        let mut o4 = [f64::INFINITY, 0.0];
        let mut any = false;
        for j in idx.iter().filter(|j| j.len() == length) {
            any = true;
            let a = tail_threshold(TailKind::Omega2, j, params, eps)?;
            let b = tail_threshold(TailKind::Omega4Tilde, j, params, eps)?;
            o2 = [o2[0].min(a), o2[1].max(a)];
            o4 = [o4[0].min(b), o4[1].max(b)];
        }
        if any {
            out.push(ThresholdRange { gamma: params.gamma, length, omega2: o2, omega4: o4 });
        }
    }
    Ok(out)
}

pub fn run(cfg: &Config) -> Result<MeasureReport> {
    let mc = &cfg.measure;
    mc.validate()?;
    let mut gammas = mc.gammas.clone();
    gammas.sort_by(f64::total_cmp);
    let params = NonResonanceParams::new(mc.r, mc.n, gammas[0], mc.weight);
    let mut spec = MeasureSpec::new(mc.weight, mc.m, mc.samples, cfg.seed);
    spec.ball_radius = mc.ball_radius;
    let eps = mc.eps.unwrap_or_else(|| default_eps(mc.r, mc.n, gammas[0]));
    let records = estimate_measure_grid(&params, &gammas, &spec, eps)?;
    let fit = fit_through_origin(&gammas, &records.iter().map(MeasureRecord::complement).collect::<Vec<_>>());
    let monotone = records.windows(2).all(|w| w[1].fraction <= w[0].fraction);
    let mut th = Vec::new();
    for &g in &gammas {
        th.extend(thresholds(&params.with_gamma(g), eps)?);
    }
    let report = MeasureReport { eps, records, fit, monotone, thresholds: th };
    write_json(&cfg.out, "measure.json", "measure", cfg, &report)?;
    Ok(report)
}

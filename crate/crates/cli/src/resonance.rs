//! `resonance`: U_gamma^N membership report for one state.

use crate::config::Config;
use crate::output::write_json;
use crate::Result;
use kirchhoff_core::divisors::{is_nonresonant, NonResonanceParams, NonResonanceReport};
use kirchhoff_core::ComplexSeq;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceOutput {
    /// "in U" or "not in U"
    pub status: String,
    pub norm: f64,
    pub report: NonResonanceReport,
}

pub fn run(cfg: &Config) -> Result<ResonanceOutput> {
    let rc = &cfg.resonance;
    let params = NonResonanceParams::new(rc.r, rc.n, rc.gamma, rc.weight);
    params.validate()?;
    let m = rc.z.iter().map(|v| v.a).max().unwrap_or(0).max(rc.n) as usize;
    for v in &rc.z {
        crate::config::check(v.a >= 1, || "resonance.z modes start at 1".into())?;
    }
    let pairs: Vec<(u32, Complex64)> = rc.z.iter().map(|v| (v.a, Complex64::new(v.re, v.im))).collect();
    let z = ComplexSeq::from_pairs(m, &pairs);
    let report = is_nonresonant(&z, &params)?;
    let out = ResonanceOutput {
        status: if report.nonresonant { "in U" } else { "not in U" }.into(),
        norm: z.norm(&rc.weight),
        report,
    };
    write_json(&cfg.out, "resonance.json", "resonance", cfg, &out)?;
    Ok(out)
}

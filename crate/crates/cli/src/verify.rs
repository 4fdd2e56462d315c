//! `nf-verify`: symbolic and numeric checks of the normal-form pipeline,
//! plus golden JSON files of K3, K5, Z5, chi3, S and M.

use crate::config::Config;
use crate::output::write_json;
use crate::{CliError, Failure, Result};
use kirchhoff_core::divisors::NonResonanceParams;
use kirchhoff_core::measure::{sample_nonresonant, MeasureSpec};
use kirchhoff_core::nf::json::{golden_fields, JsonField};
use kirchhoff_core::nf::numeric::{
    frequency_field, homological_residual, integrate_flow, max_action_change, Field, Residual, Sum,
};
use kirchhoff_core::nf::resonant::{k5_anti_expected, split_integrable, z5_expected};
use kirchhoff_core::nf::solvers::{septic_stage, solve_homological_z3z5};
use kirchhoff_core::nf::{bracket, chi3_explicit, k5_expected, lie_transform, resonant_normal_form, taylor_vf, z1, Parity, PolyVF};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::time::Instant;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    fn new(name: &str, residual: f64, tolerance: f64, detail: String) -> Self {
        Check { name: name.into(), passed: residual <= tolerance, residual, tolerance, detail }
    }

    fn exact(name: &str, field: &PolyVF, detail: String) -> Self {
        let r = if field.is_zero() { 0.0 } else { field.norm().max(f64::MIN_POSITIVE) };
        Check::new(name, r, 0.0, detail)
    }

    pub fn line(&self) -> String {
        format!(
            "{} {} residual={:e} tol={:e} {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.residual,
            self.tolerance,
            self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub golden_files: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Z_1 + P_3 + P_5 on modes <= n.
fn taylor_field(n: u32) -> Result<PolyVF> {
    let mut x = z1(n).add(&taylor_vf(1, n)?).add(&taylor_vf(2, n)?);
    x.parity = Parity::Reversible;
    Ok(x)
}

fn exact_checks(cfg: &Config, out: &mut Vec<Check>) -> Result<()> {
    let vc = &cfg.nf_verify;
    let t = Instant::now();
    let big = resonant_normal_form(2, vc.k5_n)?;
    let secs = t.elapsed().as_secs_f64();
    out.push(Check::exact(
        "k5_table",
        &big.k[1].sub(&k5_expected(vc.k5_n)),
        format!("N={} in {secs:.2}s", vc.k5_n),
    ));

    let n = vc.n;
    let nf = resonant_normal_form(2, n)?;
    let (chi3, chi5) = (&nf.generators[0], &nf.generators[1]);
    out.push(Check::exact("chi3_closed_form", &chi3.sub(&chi3_explicit(n)), format!("N={n}")));
    let p3 = taylor_vf(1, n)?;
    out.push(Check::exact(
        "z1_cubic",
        &bracket(&z1(n), chi3).add(&p3).sub(&nf.k[0]),
        format!("[Z1,chi3]+P3-K3, N={n}"),
    ));
    let (after, _) = lie_transform(&taylor_field(n)?, chi3, 2)?;
    let p5 = after.part(2);
    out.push(Check::exact(
        "z1_quintic",
        &bracket(&z1(n), chi5).add(&p5).sub(&nf.k[1]),
        format!("[Z1,chi5]+P5-K5 with P5 after the cubic step, N={n}"),
    ));
    let (z5, anti) = split_integrable(&nf.k[1]);
    out.push(Check::exact(
        "k5_split",
        &z5.sub(&z5_expected(n)).add(&anti.sub(&k5_anti_expected(n))),
        format!("Z5 and the non-integrable part, N={n}"),
    ));
    Ok(())
}

fn worst(rs: &[Residual]) -> f64 {
    Residual::worst(rs)
}

fn numeric_checks(cfg: &Config, out: &mut Vec<Check>) -> Result<()> {
    let vc = &cfg.nf_verify;
    let n = vc.n;
    let count = vc.points.max(vc.septic_points).max(vc.flow_points).max(vc.z3z5_flow_points);
    let params = NonResonanceParams::new(vc.r, n, vc.gamma, vc.weight);
    let spec = MeasureSpec::new(vc.weight, n as usize, 1, cfg.seed);
    let pts: Vec<Vec<Complex64>> = sample_nonresonant(&params, &spec, vc.eps, count, 1000 * count as u64)?
        .into_iter()
        .map(|z| z.as_slice().to_vec())
        .collect();

    let stage = septic_stage(n, &vc.weight)?;
    let z3 = frequency_field(n, false);
    let quintic_gen = stage.quintic.s.plus(&stage.quintic.m).compile();
    let quintic_k = stage.quintic.k.compile();
    let res: Vec<Residual> = pts[..vc.points]
        .par_iter()
        .map(|z| homological_residual(&z3, &quintic_gen, &quintic_k, &[], z))
        .collect::<kirchhoff_core::Result<_>>()?;
    out.push(Check::new(
        "quintic_rational",
        worst(&res),
        vc.quintic_tol,
        format!("[Z3,S+M]+K at {} points in U_gamma^N", res.len()),
    ));

    let sol = solve_homological_z3z5(&stage.q7)?;
    let b = sol.bounds;
    out.push(Check::new(
        "z3z5_bounds",
        if b.hold() { 0.0 } else { 1.0 },
        0.0,
        format!("|Q|={:.3e} |chi|={:.3e} |Z_l|={:.3e} |Z_l-1|={:.3e}", b.q, b.chi, b.znf_l, b.znf_lm1),
    ));
    let w35 = frequency_field(n, true);
    let (chi, q) = (sol.chi.compile(), stage.q7.compile());
    let (zi, zl, zl1) = (sol.z_int.compile(), sol.znf_l.compile(), sol.znf_lm1.compile());
    let res: Vec<Residual> = pts[..vc.septic_points]
        .par_iter()
        .map(|z| homological_residual(&w35, &chi, &q, &[&zi, &zl, &zl1], z))
        .collect::<kirchhoff_core::Result<_>>()?;
    out.push(Check::new(
        "z3z5_solver",
        worst(&res),
        vc.septic_tol,
        format!("[Z3+Z5,chi]+Q7-Z at {} points, {} terms in Q7", res.len(), stage.q7.len()),
    ));

    let (sz, rem) = (stage.solution.z_int.compile(), stage.solution.remainder.compile());
    let stage_nf = Sum(vec![&w35 as &dyn Field, &sz, &rem]);
    let z3z5_nf = Sum(vec![&w35 as &dyn Field, &zi, &zl, &zl1]);
    for (name, field, count, steps) in [
        ("action_invariance", &stage_nf, vc.flow_points, vc.flow_steps),
        ("action_invariance_z3z5", &z3z5_nf, vc.z3z5_flow_points, vc.z3z5_flow_steps),
    ] {
        let drift = pts[..count]
            .par_iter()
            .map(|z| Ok(max_action_change(z, &integrate_flow(field, z, 1.0, steps)?)))
            .collect::<kirchhoff_core::Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        out.push(Check::new(
            name,
            drift,
            vc.flow_tol,
            format!("max |dI_a| over unit time at {count} points, {steps} RK4 steps"),
        ));
    }
    Ok(())
}

fn read_golden(path: &Path) -> Result<JsonField> {
    let text = std::fs::read_to_string(path)?;
    let v: serde_json::Value = serde_json::from_str(&text)?;
    let body = v.get("result").cloned().unwrap_or(v);
    Ok(serde_json::from_value(body)?)
}

fn golden(cfg: &Config, out: &mut Vec<Check>) -> Result<Vec<String>> {
    let n = cfg.nf_verify.n;
    let dir = cfg.out.join("golden");
    let mut written = Vec::new();
    let mut mismatched = Vec::new();
    for f in golden_fields(n)? {
        let name = format!("{}_n{n}.json", f.name.to_lowercase());
        write_json(&dir, &name, "nf-verify", cfg, &f)?;
        written.push(name.clone());
        if let Some(reference) = &cfg.nf_verify.golden {
            let path = reference.join(&name);
            match read_golden(&path) {
                Ok(stored) if stored == f => {}
                Ok(_) => mismatched.push(name),
                Err(e) => mismatched.push(format!("{name} ({e})")),
            }
        }
    }
    if let Some(reference) = &cfg.nf_verify.golden {
        out.push(Check::new(
            "golden_match",
            mismatched.len() as f64,
            0.0,
            if mismatched.is_empty() {
                format!("against {}", reference.display())
            } else {
                format!("differs: {}", mismatched.join(", "))
            },
        ));
    }
    Ok(written)
}

pub fn run(cfg: &Config) -> Result<VerifyReport> {
    cfg.nf_verify.validate()?;
    let mut checks = Vec::new();
    exact_checks(cfg, &mut checks)?;
    numeric_checks(cfg, &mut checks)?;
    let golden_files = golden(cfg, &mut checks)?;
    let report = VerifyReport { checks, golden_files };
    write_json(&cfg.out, "nf_verify.json", "nf-verify", cfg, &report)?;
    Ok(report)
}

/// Maps a report with failures to the verification exit code.
pub fn into_result(report: VerifyReport) -> Result<VerifyReport> {
    if report.passed() {
        Ok(report)
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        Err(CliError::new(Failure::Verification, format!("failed checks: {}", failed.join(", "))))
    }
}

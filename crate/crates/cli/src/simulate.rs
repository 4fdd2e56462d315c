//! `simulate`: one trajectory, written as CSV plus a JSON summary.

use crate::config::{Config, Initial};
use crate::oracle::duffing_reference;
use crate::output::{write_csv, write_json};
use crate::Result;
use kirchhoff_core::measure::{sample_one, MeasureSpec};
use kirchhoff_core::simulator::{simulate, SimConfig, Trajectory};
use kirchhoff_core::transforms::{z_to_uv, UVState, ZState};
use serde::{Deserialize, Serialize};

/// Agreement with the scalar reference for single-mode data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuffingCheck {
    pub mode: u32,
    /// max over recorded times of |u_a - q| and |v_a - q'|
    pub max_abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateSummary {
    pub steps: usize,
    pub records: usize,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub initial_energy: f64,
    pub final_energy: f64,
    pub max_energy_drift: f64,
    pub final_sup_drift: f64,
    pub max_sup_drift: f64,
    pub max_norm_ratio: f64,
    pub duffing: Option<DuffingCheck>,
}

pub fn initial_state(cfg: &Config) -> Result<UVState> {
    let sc = &cfg.simulate;
    match &sc.init {
        Initial::Modes { modes } => {
            let mut st = UVState::zeros(sc.m);
            for v in modes {
                st.u[v.a as usize - 1] = v.u;
                st.v[v.a as usize - 1] = v.v;
            }
            Ok(st)
        }
        Initial::Measure { eps } => {
            let spec = MeasureSpec::new(sc.weight, sc.m, 1, cfg.seed);
            let z = sample_one(&spec, 0)?.to_seq(*eps);
            Ok(z_to_uv(&ZState(z))?)
        }
    }
}

fn single_mode(st: &UVState) -> Option<u32> {
    let live: Vec<usize> = (0..st.truncation()).filter(|&i| st.u[i] != 0.0 || st.v[i] != 0.0).collect();
    (live.len() == 1).then(|| live[0] as u32 + 1)
}

pub fn trajectory_rows(tr: &Trajectory) -> Vec<Vec<f64>> {
    (0..tr.len())
        .map(|k| {
            let mut row = vec![tr.times[k], tr.energy[k], tr.sup_drift[k]];
            row.extend(&tr.actions[k]);
            row
        })
        .collect()
}

pub fn run(cfg: &Config) -> Result<SimulateSummary> {
    let sc = &cfg.simulate;
    sc.validate()?;
    let st = initial_state(cfg)?;
    let mode = if sc.linearized { None } else { single_mode(&st) };
    let mut sim = SimConfig::new(sc.dt, sc.t_final, sc.scheme);
    sim.record_stride = sc.record_stride;
    sim.weight = sc.weight;
    sim.linearized = sc.linearized;
    sim.allow_coarse_dt = sc.allow_coarse_dt;
    sim.store_states = mode.is_some();
    sim.validate(sc.m)?;
    let tr = simulate(&st, &sim)?;

    let duffing = match mode {
        Some(a) => {
            let i = a as usize - 1;
            let reference = duffing_reference(a, st.u[i], st.v[i], &tr.times)?;
            let states = tr.states.as_ref().expect("states were stored");
            let err = states
                .iter()
                .zip(&reference)
                .map(|(x, (q, p))| (x.u[i] - q).abs().max((x.v[i] - p).abs()))
                .fold(0.0, f64::max);
            Some(DuffingCheck { mode: a, max_abs_error: err })
        }
        None => None,
    };

    let mut cols: Vec<String> = ["t", "H", "sup_drift"].iter().map(|s| s.to_string()).collect();
    cols.extend((1..=sc.m).map(|a| format!("I_{a}")));
    write_csv(&cfg.out, "simulate.csv", "simulate", cfg, &cols, &trajectory_rows(&tr))?;

    let last = tr.len() - 1;
    let summary = SimulateSummary {
        steps: sim.steps(),
        records: tr.len(),
        t_final: tr.times[last],
        initial_energy: tr.energy[0],
        final_energy: tr.energy[last],
        max_energy_drift: tr.max_energy_drift(),
        final_sup_drift: tr.sup_drift[last],
        max_sup_drift: tr.max_sup_drift(),
        max_norm_ratio: tr.max_norm_ratio(),
        duffing,
    };
    write_json(&cfg.out, "simulate.json", "simulate", cfg, &summary)?;
    Ok(summary)
}

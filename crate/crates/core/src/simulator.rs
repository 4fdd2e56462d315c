//! Galerkin truncation of the Kirchhoff string in the sine basis.
//!
//! The modal system is u_a' = v_a, v_a' = -(1 + ||u||_1^2) a^2 u_a with
//! Hamiltonian H = ||v||^2/2 + ||u||_1^2/2 + ||u||_1^4/4.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{ComplexSeq, WeightSpec};
use crate::transforms::{uv_to_z, PsiState, UVState, ZState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Kick / exact rotation / kick splitting of H into its quadratic and quartic parts.
    StrangSplit,
    /// Classical fourth-order Runge-Kutta on the modal ODE.
    Rk4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub scheme: Scheme,
    pub record_stride: usize,
    /// Weight used in the sup-drift and norm observables.
    pub weight: WeightSpec,
    /// Drop the ||u||_1^2 coupling (linear wave equation).
    #[serde(default)]
    pub linearized: bool,
    /// Keep every recorded state in the trajectory.
    #[serde(default)]
    pub store_states: bool,
    /// Skip the dt <= 0.1/M resolution check.
    #[serde(default)]
    pub allow_coarse_dt: bool,
}

impl SimConfig {
    pub fn new(dt: f64, t_final: f64, scheme: Scheme) -> Self {
        SimConfig {
            dt,
            t_final,
            scheme,
            record_stride: 1,
            weight: WeightSpec::sobolev(0.0),
            linearized: false,
            store_states: false,
            allow_coarse_dt: false,
        }
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Domain(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::Domain(format!("T = {} must be nonnegative", self.t_final)));
        }
        if self.record_stride == 0 {
            return Err(Error::Domain("record_stride must be >= 1".into()));
        }
        if !self.allow_coarse_dt && m > 0 && self.dt > 0.1 / m as f64 {
            return Err(Error::Domain(format!(
                "dt = {} does not resolve the fastest frequency (needs dt <= 0.1/M = {})",
                self.dt,
                0.1 / m as f64
            )));
        }
        self.weight.validate()
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

/// Recorded observables along a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub actions: Vec<Vec<f64>>,
    /// sup_a w(a)^2 |I_a(t) - I_a(0)|
    pub sup_drift: Vec<f64>,
    /// ||z(t)|| in the configured weight.
    pub norm: Vec<f64>,
    pub states: Option<Vec<UVState>>,
}

impl Trajectory {
    pub fn max_sup_drift(&self) -> f64 {
        self.sup_drift.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_energy_drift(&self) -> f64 {
        let h0 = self.energy[0];
        let scale = if h0 != 0.0 { h0.abs() } else { 1.0 };
        self.energy.iter().map(|h| (h - h0).abs() / scale).fold(0.0, f64::max)
    }

    pub fn max_norm_ratio(&self) -> f64 {
        let n0 = self.norm[0];
        if n0 == 0.0 {
            return 1.0;
        }
        self.norm.iter().map(|n| n / n0).fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Tangent (u', v') of the modal system.
pub fn rhs_uv(st: &UVState) -> UVState {
    rhs_with(st, 1.0)
}

fn rhs_with(st: &UVState, coupling: f64) -> UVState {
    let stiff = 1.0 + coupling * st.u_h1_sq();
    let m = st.truncation();
    let mut out = UVState::zeros(m);
    for i in 0..m {
        let a2 = ((i + 1) * (i + 1)) as f64;
        out.u[i] = st.v[i];
        out.v[i] = -stiff * a2 * st.u[i];
    }
    out
}

pub fn energy(st: &UVState) -> f64 {
    let s = st.u_h1_sq();
    0.5 * st.v.iter().map(|x| x * x).sum::<f64>() + 0.5 * s + 0.25 * s * s
}

/// I_a = (a u_a^2 + v_a^2 / a) / 2.
pub fn actions_uv(st: &UVState) -> Vec<f64> {
    (0..st.truncation())
        .map(|i| {
            let a = (i + 1) as f64;
            0.5 * (a * st.u[i] * st.u[i] + st.v[i] * st.v[i] / a)
        })
        .collect()
}

pub fn actions_psi(psi: &PsiState) -> Vec<f64> {
    psi.0.actions()
}

pub fn actions_z(z: &ZState) -> Vec<f64> {
    z.0.actions()
}

fn axpy(x: &UVState, h: f64, d: &UVState) -> UVState {
    UVState {
        u: x.u.iter().zip(&d.u).map(|(a, b)| a + h * b).collect(),
        v: x.v.iter().zip(&d.v).map(|(a, b)| a + h * b).collect(),
    }
}

fn kick(st: &mut UVState, h: f64, coupling: f64) {
    let s = coupling * st.u_h1_sq();
    if s == 0.0 {
        return;
    }
    for i in 0..st.truncation() {
        let a2 = ((i + 1) * (i + 1)) as f64;
        st.v[i] -= h * s * a2 * st.u[i];
    }
}

fn rotate(st: &mut UVState, h: f64) {
    for i in 0..st.truncation() {
        let a = (i + 1) as f64;
        let (sn, cs) = (a * h).sin_cos();
        let (u, v) = (st.u[i], st.v[i]);
        st.u[i] = u * cs + v * sn / a;
        st.v[i] = v * cs - a * u * sn;
    }
}

/// Magnitude past which a run is treated as blown up.
const OVERFLOW_GUARD: f64 = 1e100;

fn finite(st: &UVState) -> bool {
    st.u.iter().chain(&st.v).all(|x| x.is_finite() && x.abs() < OVERFLOW_GUARD)
}

fn advance(st: &UVState, dt: f64, scheme: Scheme, coupling: f64) -> UVState {
    match scheme {
        Scheme::StrangSplit => {
            let mut x = st.clone();
            kick(&mut x, 0.5 * dt, coupling);
            rotate(&mut x, dt);
            kick(&mut x, 0.5 * dt, coupling);
            x
        }
        Scheme::Rk4 => {
            let k1 = rhs_with(st, coupling);
            let k2 = rhs_with(&axpy(st, 0.5 * dt, &k1), coupling);
            let k3 = rhs_with(&axpy(st, 0.5 * dt, &k2), coupling);
            let k4 = rhs_with(&axpy(st, dt, &k3), coupling);
            let mut x = st.clone();
            for i in 0..x.truncation() {
                x.u[i] += dt / 6.0 * (k1.u[i] + 2.0 * k2.u[i] + 2.0 * k3.u[i] + k4.u[i]);
                x.v[i] += dt / 6.0 * (k1.v[i] + 2.0 * k2.v[i] + 2.0 * k3.v[i] + k4.v[i]);
            }
            x
        }
    }
}

/// Advances one dt.
pub fn step(st: &UVState, cfg: &SimConfig) -> Result<UVState> {
    let coupling = if cfg.linearized { 0.0 } else { 1.0 };
    let next = advance(st, cfg.dt, cfg.scheme, coupling);
    if !finite(&next) {
        return Err(Error::Numerical { t: cfg.dt, reason: "non-finite state after one step".into() });
    }
    Ok(next)
}

fn z_norm(st: &UVState, w: &WeightSpec) -> f64 {
    uv_to_z(st).0.norm(w)
}

/// Integrates to T, recording observables every `record_stride` steps and at T.
pub fn simulate(st: &UVState, cfg: &SimConfig) -> Result<Trajectory> {
    cfg.validate(st.truncation())?;
    let coupling = if cfg.linearized { 0.0 } else { 1.0 };
    let w2: Vec<f64> = (1..=st.truncation() as u32).map(|a| cfg.weight.weight_sq(a)).collect();
    let i0 = actions_uv(st);
    let mut traj = Trajectory {
        times: Vec::new(),
        energy: Vec::new(),
        actions: Vec::new(),
        sup_drift: Vec::new(),
        norm: Vec::new(),
        states: cfg.store_states.then(Vec::new),
    };
    let record = |t: f64, x: &UVState, traj: &mut Trajectory| {
        let ia = actions_uv(x);
        let drift = ia.iter().zip(&i0).zip(&w2).map(|((a, b), w)| w * (a - b).abs()).fold(0.0, f64::max);
        traj.times.push(t);
        traj.energy.push(energy(x));
        traj.sup_drift.push(drift);
        traj.norm.push(z_norm(x, &cfg.weight));
        traj.actions.push(ia);
        if let Some(s) = traj.states.as_mut() {
            s.push(x.clone());
        }
    };
    record(0.0, st, &mut traj);
    let n = cfg.steps();
    let mut x = st.clone();
    for k in 1..=n {
        x = advance(&x, cfg.dt, cfg.scheme, coupling);
        let t = k as f64 * cfg.dt;
        if !finite(&x) {
            return Err(Error::Numerical { t, reason: "non-finite or overflowing state".into() });
        }
        if k % cfg.record_stride == 0 || k == n {
            record(t, &x, &mut traj);
        }
    }
    Ok(traj)
}

/// Final state after integrating to T without recording.
pub fn integrate(st: &UVState, cfg: &SimConfig) -> Result<UVState> {
    cfg.validate(st.truncation())?;
    let coupling = if cfg.linearized { 0.0 } else { 1.0 };
    let mut x = st.clone();
    for k in 1..=cfg.steps() {
        x = advance(&x, cfg.dt, cfg.scheme, coupling);
        if !finite(&x) {
            return Err(Error::Numerical { t: k as f64 * cfg.dt, reason: "non-finite state".into() });
        }
    }
    Ok(x)
}

/// Velocity flip (u, v) -> (u, -v), the reversing symmetry of the flow.
pub fn flip_velocity(st: &UVState) -> UVState {
    UVState { u: st.u.clone(), v: st.v.iter().map(|x| -x).collect() }
}

/// z-coordinates of a state, for norm observables.
pub fn z_of(st: &UVState) -> ComplexSeq {
    uv_to_z(st).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rhs_examples() {
        let mut st = UVState::zeros(2);
        st.v[0] = 1.0;
        let d = rhs_uv(&st);
        assert_eq!(d.u[0], 1.0);
        assert_eq!(d.v, vec![0.0, 0.0]);

        let mut st = UVState::zeros(2);
        st.u[0] = 1.0;
        assert_eq!(rhs_uv(&st).v[0], -2.0);
        assert_eq!(rhs_uv(&UVState::zeros(3)), UVState::zeros(3));
    }

    #[test]
    fn energy_examples() {
        let mut st = UVState::zeros(2);
        st.u[0] = 1.0;
        assert_relative_eq!(energy(&st), 0.75);
        let mut st = UVState::zeros(2);
        st.v[1] = 2.0;
        assert_relative_eq!(energy(&st), 2.0);
        // (u_1, v) = (1, 0) scaled by 2
        let mut st = UVState::zeros(2);
        st.u[0] = 2.0;
        assert_relative_eq!(energy(&st), 6.0);
    }

    #[test]
    fn action_examples() {
        let mut st = UVState::zeros(1);
        st.u[0] = 1.0;
        st.v[0] = 1.0;
        assert_relative_eq!(actions_uv(&st)[0], 1.0);
        let psi = PsiState(ComplexSeq::from_pairs(2, &[(2, num_complex::Complex64::new(1.0, 1.0))]));
        assert_relative_eq!(actions_psi(&psi)[1], 2.0);
        assert!(actions_z(&ZState(ComplexSeq::zeros(4))).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn psi_actions_match_uv_actions() {
        let st = UVState::new(vec![0.1, -0.02, 0.003], vec![0.05, 0.01, -0.004]);
        let a = actions_uv(&st);
        let b = actions_psi(&crate::transforms::uv_to_psi(&st));
        for (x, y) in a.iter().zip(&b) {
            assert_relative_eq!(x, y, max_relative = 1e-14);
        }
    }

    #[test]
    fn zero_state_is_equilibrium() {
        let cfg = SimConfig::new(1e-3, 1.0, Scheme::StrangSplit);
        assert_eq!(step(&UVState::zeros(4), &cfg).unwrap(), UVState::zeros(4));
        let tr = simulate(&UVState::zeros(4), &SimConfig::new(1e-3, 0.0, Scheme::Rk4)).unwrap();
        assert_eq!(tr.len(), 1);
    }

    #[test]
    fn linearized_split_keeps_actions() {
        let st = UVState::new(vec![0.3, -0.1, 0.05, 0.02], vec![0.1, 0.2, -0.1, 0.04]);
        let mut cfg = SimConfig::new(1e-2, 5.0, Scheme::StrangSplit);
        cfg.linearized = true;
        let end = integrate(&st, &cfg).unwrap();
        for (x, y) in actions_uv(&st).iter().zip(actions_uv(&end)) {
            assert!((x - y).abs() <= 1e-14);
        }
    }

    #[test]
    fn one_step_energy_error() {
        let st = UVState::new(
            (1..=16).map(|a| 0.05 / (a as f64).powi(4)).collect(),
            (1..=16).map(|a| 0.03 / (a as f64).powi(3)).collect(),
        );
        let cfg = SimConfig::new(1e-3, 1e-3, Scheme::StrangSplit);
        let h0 = energy(&st);
        let h1 = energy(&step(&st, &cfg).unwrap());
        assert!((h1 - h0).abs() <= 1e-10 * h0);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(SimConfig::new(0.0, 1.0, Scheme::Rk4).validate(4).is_err());
        assert!(SimConfig::new(0.1, 1.0, Scheme::Rk4).validate(16).is_err());
        let mut cfg = SimConfig::new(1e-3, 1.0, Scheme::Rk4);
        cfg.record_stride = 0;
        assert!(cfg.validate(4).is_err());
    }

    #[test]
    fn blow_up_is_reported_with_time() {
        let st = UVState::new(vec![1e6], vec![0.0]);
        let mut cfg = SimConfig::new(0.05, 10.0, Scheme::Rk4);
        cfg.allow_coarse_dt = true;
        match simulate(&st, &cfg) {
            Err(Error::Numerical { t, .. }) => assert!(t > 0.0),
            other => panic!("expected abort, got {other:?}"),
        }
    }
}

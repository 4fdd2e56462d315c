//! Coordinate chain u,v -> psi -> eta -> z and the time reparameterization.
//!
//! psi mixes positions and velocities, eta removes the unbounded off-diagonal
//! coupling through the scalar rho(Q), and z rescales by the mode number.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{ComplexSeq, WeightSpec};

/// Real sine coefficients (u_a, v_a), a = 1..=M.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UVState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl UVState {
    pub fn zeros(m: usize) -> Self {
        UVState { u: vec![0.0; m], v: vec![0.0; m] }
    }

    pub fn new(u: Vec<f64>, v: Vec<f64>) -> Self {
        assert_eq!(u.len(), v.len(), "u and v must share the truncation");
        UVState { u, v }
    }

    pub fn truncation(&self) -> usize {
        self.u.len()
    }

    /// ||u||_{s+1/2}^2 + ||v||_{s-1/2}^2.
    pub fn sobolev_sq(&self, s: f64) -> f64 {
        (0..self.truncation())
            .map(|i| {
                let a = (i + 1) as f64;
                a.powf(2.0 * s + 1.0) * self.u[i] * self.u[i] + a.powf(2.0 * s - 1.0) * self.v[i] * self.v[i]
            })
            .sum()
    }

    /// ||u||_1^2 = sum a^2 u_a^2.
    pub fn u_h1_sq(&self) -> f64 {
        self.u.iter().enumerate().map(|(i, x)| ((i + 1) * (i + 1)) as f64 * x * x).sum()
    }

    pub fn max_abs_diff(&self, other: &UVState) -> f64 {
        self.u
            .iter()
            .zip(&other.u)
            .chain(self.v.iter().zip(&other.v))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiState(pub ComplexSeq);

/// eta coordinates together with Q(eta, conj eta).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaState {
    pub eta: ComplexSeq,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZState(pub ComplexSeq);

impl ZState {
    pub fn norm(&self, w: &WeightSpec) -> f64 {
        self.0.norm(w)
    }
}

pub fn uv_to_psi(st: &UVState) -> PsiState {
    let vals = (0..st.truncation())
        .map(|i| {
            let sa = ((i + 1) as f64).sqrt();
            Complex64::new(sa * st.u[i], st.v[i] / sa) / std::f64::consts::SQRT_2
        })
        .collect();
    PsiState(ComplexSeq::from_vec(vals))
}

pub fn psi_to_uv(psi: &PsiState) -> UVState {
    let m = psi.0.truncation();
    let mut out = UVState::zeros(m);
    for (a, c) in psi.0.iter() {
        let sa = (a as f64).sqrt();
        out.u[a as usize - 1] = std::f64::consts::SQRT_2 * c.re / sa;
        out.v[a as usize - 1] = std::f64::consts::SQRT_2 * c.im * sa;
    }
    out
}

/// Q = 1/4 sum_b b |psi_b + conj psi_b|^2 = sum_b b (Re psi_b)^2.
pub fn q_of(seq: &ComplexSeq) -> f64 {
    seq.iter().map(|(b, c)| b as f64 * c.re * c.re).sum()
}

pub fn compute_q(psi: &PsiState) -> f64 {
    q_of(&psi.0)
}

/// rho(x) = x / (1 + x + sqrt(1 + 2x)).
pub fn rho(x: f64) -> f64 {
    x / (1.0 + x + (1.0 + 2.0 * x).sqrt())
}

/// Inverse of x -> x sqrt(1 + 2x) on x >= 0.
///
/// Newton on g(x) = x^2 (1 + 2x) - y^2, kept inside the bracket [0, y]
/// by bisection whenever a step leaves it.
pub fn varphi(y: f64) -> Result<f64> {
    if !y.is_finite() || y < 0.0 {
        return Err(Error::Domain(format!("varphi needs a finite y >= 0, got {y}")));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    let g = |x: f64| x * x * (1.0 + 2.0 * x) - y * y;
    let (mut lo, mut hi) = (0.0, y);
    let mut x = y / (1.0 + 2.0 * y).sqrt();
    for _ in 0..200 {
        let gx = g(x);
        if gx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let dg = 2.0 * x + 6.0 * x * x;
        let mut next = if dg > 0.0 { x - gx / dg } else { 0.5 * (lo + hi) };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let done = (next - x).abs() <= 1e-16 * x.max(f64::MIN_POSITIVE) || hi - lo <= 4.0 * f64::EPSILON * hi;
        x = next;
        if done {
            break;
        }
    }
    debug_assert!((x * (1.0 + 2.0 * x).sqrt() - y).abs() <= 1e-13 * y);
    Ok(x)
}

pub fn psi_to_eta(psi: &PsiState) -> EtaState {
    let q = compute_q(psi);
    let r = rho(q);
    let scale = 1.0 / (1.0 - r * r).sqrt();
    let vals = psi.0.as_slice().iter().map(|&c| (c + c.conj() * r) * scale).collect();
    let eta = ComplexSeq::from_vec(vals);
    let q_eta = q_of(&eta);
    EtaState { eta, q: q_eta }
}

/// Recovers Q(psi) = varphi(Q(eta)) and undoes the 2x2 mixing.
pub fn eta_to_psi(st: &EtaState) -> Result<PsiState> {
    let q_psi = varphi(st.q)?;
    let r = rho(q_psi);
    let scale = 1.0 / (1.0 - r * r).sqrt();
    let vals = st.eta.as_slice().iter().map(|&c| (c - c.conj() * r) * scale).collect();
    Ok(PsiState(ComplexSeq::from_vec(vals)))
}

pub fn eta_from_seq(eta: ComplexSeq) -> EtaState {
    let q = q_of(&eta);
    EtaState { eta, q }
}

pub fn eta_to_z(st: &EtaState) -> ZState {
    let vals = st.eta.iter().map(|(a, c)| c * a as f64).collect();
    ZState(ComplexSeq::from_vec(vals))
}

pub fn z_to_eta(z: &ZState) -> EtaState {
    let vals = z.0.iter().map(|(a, c)| c / a as f64).collect();
    eta_from_seq(ComplexSeq::from_vec(vals))
}

/// y(z) = 1/4 sum_b |z_b + conj z_b|^2 / b, equal to Q(eta).
pub fn y_of_z(z: &ZState) -> f64 {
    z.0.iter().map(|(b, c)| c.re * c.re / b as f64).sum()
}

/// d tau / d t = sqrt(1 + 2 varphi(Q(eta))).
pub fn time_dilation(st: &EtaState) -> f64 {
    let phi = varphi(st.q.max(0.0)).expect("Q(eta) is nonnegative");
    (1.0 + 2.0 * phi).sqrt()
}

pub fn uv_to_z(st: &UVState) -> ZState {
    eta_to_z(&psi_to_eta(&uv_to_psi(st)))
}

pub fn z_to_uv(z: &ZState) -> Result<UVState> {
    Ok(psi_to_uv(&eta_to_psi(&z_to_eta(z))?))
}

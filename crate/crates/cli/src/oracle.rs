//! Reference solution for data on a single mode a, where the modal system
//! reduces to the scalar Duffing oscillator q'' = -(1 + a^2 q^2) a^2 q.
//! Integrated with an adaptive eighth-order Dormand-Prince scheme.

use crate::{CliError, Failure, Result};
use ode_solvers::{Dop853, System, Vector2};

struct Duffing {
    a2: f64,
}

impl System<f64, Vector2<f64>> for Duffing {
    fn system(&self, _t: f64, y: &Vector2<f64>, dy: &mut Vector2<f64>) {
        dy[0] = y[1];
        dy[1] = -(1.0 + self.a2 * y[0] * y[0]) * self.a2 * y[0];
    }
}

/// Tolerance handed to the adaptive integrator.
pub const REFERENCE_TOL: f64 = 1e-13;

/// (u_a, v_a) at each of `times` (nondecreasing, starting at or after 0).
pub fn duffing_reference(a: u32, u0: f64, v0: f64, times: &[f64]) -> Result<Vec<(f64, f64)>> {
    let a2 = (a as f64).powi(2);
    let mut y = Vector2::new(u0, v0);
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        if target < t {
            return Err(CliError::config("reference times must be nondecreasing"));
        }
        if target > t {
            let mut solver = Dop853::new(Duffing { a2 }, t, target, 0.0, y, REFERENCE_TOL, REFERENCE_TOL);
            solver
                .integrate()
                .map_err(|e| CliError::new(Failure::Numerical, format!("reference integration failed at t = {t}: {e:?}")))?;
            y = *solver.y_out().last().expect("integrator produced no output");
            t = target;
        }
        out.push((y[0], y[1]));
    }
    Ok(out)
}

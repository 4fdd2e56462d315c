//! Numeric brackets, homological residuals and flows of symbolic fields.

use super::exact::imag;
use super::mono::Mono;
use super::poly::{Parity, PolyVF};
use super::rational::Compiled;
use super::scalar::{dual_point, Dual, Scalar};
use crate::divisors::omega4_monomials;
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Anything that can be evaluated at complex and dual points.
pub trait Field: Sync {
    fn eval(&self, z: &[Complex64]) -> Result<Vec<Complex64>>;
    fn eval_dual(&self, z: &[Dual]) -> Result<Vec<Dual>>;
}

impl Field for PolyVF {
    fn eval(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        Ok(self.evaluate(z))
    }

    fn eval_dual(&self, z: &[Dual]) -> Result<Vec<Dual>> {
        Ok(self.evaluate(z))
    }
}

impl Field for Compiled {
    fn eval(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        self.evaluate(z)
    }

    fn eval_dual(&self, z: &[Dual]) -> Result<Vec<Dual>> {
        self.evaluate(z)
    }
}

/// Sum of several fields.
pub struct Sum<'a>(pub Vec<&'a dyn Field>);

impl Field for Sum<'_> {
    fn eval(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::new(0.0, 0.0); z.len()];
        for f in &self.0 {
            for (o, v) in out.iter_mut().zip(f.eval(z)?) {
                *o += v;
            }
        }
        Ok(out)
    }

    fn eval_dual(&self, z: &[Dual]) -> Result<Vec<Dual>> {
        let mut out = vec![Dual::zero(); z.len()];
        for f in &self.0 {
            for (o, v) in out.iter_mut().zip(f.eval_dual(z)?) {
                *o += v;
            }
        }
        Ok(out)
    }
}

/// W^(a) = -i (omega^(2)_a [+ omega^(4)_a]) z_a for a <= N, as a polynomial field.
pub fn frequency_field(n: u32, quintic: bool) -> PolyVF {
    let mut w = PolyVF::new(Parity::Reversible).with_cutoff(n);
    for a in 1..=n {
        let za = Mono::var(a, false);
        w.add_monomial(a, za.mul(&action(a)), &imag(super::exact::q(-1, 4)));
        if quintic {
            for (d, e, c) in omega4_monomials(a, n) {
                w.add_monomial(a, za.mul(&action(d)).mul(&action(e)), &imag(-c));
            }
        }
    }
    w
}

fn action(e: u32) -> Mono {
    Mono::var(e, false).mul(&Mono::var(e, true))
}

/// DX(z)[w] via dual numbers.
pub fn derivative(x: &dyn Field, z: &[Complex64], w: &[Complex64]) -> Result<Vec<Complex64>> {
    Ok(x.eval_dual(&dual_point(z, w))?.into_iter().map(|d| d.d).collect())
}

/// [X, Y](z) = DX(z)[Y(z)] - DY(z)[X(z)].
pub fn numeric_bracket(x: &dyn Field, y: &dyn Field, z: &[Complex64]) -> Result<Vec<Complex64>> {
    let xv = x.eval(z)?;
    let yv = y.eval(z)?;
    let a = derivative(x, z, &yv)?;
    let b = derivative(y, z, &xv)?;
    Ok(a.into_iter().zip(b).map(|(p, q)| p - q).collect())
}

/// Size of a residual and of the largest term that entered it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub abs: f64,
    pub scale: f64,
}

impl Residual {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.abs
        } else {
            self.abs / self.scale
        }
    }

    /// Worst relative residual of a batch.
    pub fn worst(all: &[Residual]) -> f64 {
        all.iter().map(Residual::relative).fold(0.0, f64::max)
    }
}

fn sup(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// [L, chi](z) + Q(z) - sum rhs(z), with scale the largest sup-norm among the pieces.
pub fn homological_residual(
    lin: &dyn Field,
    chi: &dyn Field,
    q: &dyn Field,
    rhs: &[&dyn Field],
    z: &[Complex64],
) -> Result<Residual> {
    let br = numeric_bracket(lin, chi, z)?;
    let qv = q.eval(z)?;
    let mut scale = sup(&br).max(sup(&qv));
    let mut res: Vec<Complex64> = br.iter().zip(&qv).map(|(a, b)| a + b).collect();
    for f in rhs {
        let v = f.eval(z)?;
        scale = scale.max(sup(&v));
        for (r, x) in res.iter_mut().zip(&v) {
            *r -= x;
        }
    }
    Ok(Residual { abs: sup(&res), scale })
}

/// Classical RK4 for z' = X(z).
pub fn integrate_flow(x: &dyn Field, z0: &[Complex64], t: f64, steps: usize) -> Result<Vec<Complex64>> {
    if steps == 0 || !(t.is_finite()) {
        return Err(Error::Domain("flow needs a finite time and at least one step".into()));
    }
    let h = t / steps as f64;
    let axpy = |z: &[Complex64], k: &[Complex64], s: f64| -> Vec<Complex64> { z.iter().zip(k).map(|(a, b)| a + b * s).collect() };
    let mut z = z0.to_vec();
    for i in 0..steps {
        let k1 = x.eval(&z)?;
        let k2 = x.eval(&axpy(&z, &k1, h / 2.0))?;
        let k3 = x.eval(&axpy(&z, &k2, h / 2.0))?;
        let k4 = x.eval(&axpy(&z, &k3, h))?;
        for (j, zj) in z.iter_mut().enumerate() {
            *zj += (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) * (h / 6.0);
        }
        if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Numerical { t: h * (i + 1) as f64, reason: "non-finite state".into() });
        }
    }
    Ok(z)
}

/// max_a |I_a(z1) - I_a(z0)|.
pub fn max_action_change(z0: &[Complex64], z1: &[Complex64]) -> f64 {
    z0.iter().zip(z1).map(|(a, b)| (a.norm_sqr() - b.norm_sqr()).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nf::poly::bracket;
    use crate::nf::resonant::{chi3_explicit, k3_expected, taylor_vf};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_z(rng: &mut ChaCha8Rng, m: usize) -> Vec<Complex64> {
        (0..m).map(|_| Complex64::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5))).collect()
    }

    #[test]
    fn dual_bracket_matches_symbolic() {
        let n = 4;
        let p3 = taylor_vf(1, n).unwrap();
        let chi = chi3_explicit(n);
        let sym = bracket(&p3, &chi);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let z = rand_z(&mut rng, n as usize);
            let num = numeric_bracket(&p3, &chi, &z).unwrap();
            let s = sym.evaluate(&z);
            for (a, b) in num.iter().zip(&s) {
                assert!((a - b).norm() <= 1e-12 * (1.0 + b.norm()));
            }
        }
    }

    #[test]
    fn dual_derivative_matches_finite_differences() {
        let n = 3;
        let p5 = taylor_vf(2, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let z = rand_z(&mut rng, n as usize);
        let w = rand_z(&mut rng, n as usize);
        let d = derivative(&p5, &z, &w).unwrap();
        let h = 1e-5;
        let plus: Vec<_> = z.iter().zip(&w).map(|(a, b)| a + b * h).collect();
        let minus: Vec<_> = z.iter().zip(&w).map(|(a, b)| a - b * h).collect();
        let (fp, fm) = (p5.evaluate(&plus), p5.evaluate(&minus));
        for i in 0..n as usize {
            let fd = (fp[i] - fm[i]) / (2.0 * h);
            assert!((fd - d[i]).norm() <= 1e-7 * (1.0 + d[i].norm()));
        }
    }

    #[test]
    fn cubic_frequency_field_is_k3() {
        assert_eq!(frequency_field(5, false).canonical_terms(), k3_expected(5).canonical_terms());
    }

    #[test]
    fn integrable_flow_keeps_actions() {
        let w = frequency_field(4, true);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let z = rand_z(&mut rng, 4);
        let z1 = integrate_flow(&w, &z, 1.0, 200).unwrap();
        assert!(max_action_change(&z, &z1) < 1e-12);
    }
}

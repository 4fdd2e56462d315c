//! Scalars for numeric evaluation of vector fields.
//!
//! `Dual` carries a first-order perturbation along a real parameter, so a
//! field evaluated at `z + eps w` yields its directional derivative DX(z)[w]
//! in the `d` part. Conjugation acts on both parts.

use num_complex::Complex64;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + Send
    + Sync
{
    fn from_c64(c: Complex64) -> Self;
    fn conj(self) -> Self;
    /// The primal value.
    fn value(self) -> Complex64;

    fn zero() -> Self {
        Self::from_c64(Complex64::new(0.0, 0.0))
    }

    fn one() -> Self {
        Self::from_c64(Complex64::new(1.0, 0.0))
    }

    fn from_f64(x: f64) -> Self {
        Self::from_c64(Complex64::new(x, 0.0))
    }

    fn scale(self, c: Complex64) -> Self {
        self * Self::from_c64(c)
    }

    fn powu(self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc * self;
        }
        acc
    }
}

impl Scalar for Complex64 {
    fn from_c64(c: Complex64) -> Self {
        c
    }

    fn conj(self) -> Self {
        Complex64::conj(&self)
    }

    fn value(self) -> Complex64 {
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub v: Complex64,
    pub d: Complex64,
}

impl Dual {
    pub fn new(v: Complex64, d: Complex64) -> Self {
        Dual { v, d }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.v + o.v, self.d + o.d)
    }
}

impl AddAssign for Dual {
    fn add_assign(&mut self, o: Dual) {
        self.v += o.v;
        self.d += o.d;
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual::new(self.v - o.v, self.d - o.d)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual::new(self.v * o.v, self.v * o.d + self.d * o.v)
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        let v = self.v / o.v;
        Dual::new(v, (self.d - v * o.d) / o.v)
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.v, -self.d)
    }
}

impl Scalar for Dual {
    fn from_c64(c: Complex64) -> Self {
        Dual::new(c, Complex64::new(0.0, 0.0))
    }

    fn conj(self) -> Self {
        Dual::new(self.v.conj(), self.d.conj())
    }

    fn value(self) -> Complex64 {
        self.v
    }
}

/// Seeds z + eps w.
pub fn dual_point(z: &[Complex64], w: &[Complex64]) -> Vec<Dual> {
    z.iter().zip(w).map(|(&a, &b)| Dual::new(a, b)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn dual_rules() {
        let x = Dual::new(Complex64::new(2.0, 1.0), Complex64::new(1.0, 0.0));
        // d/dt of x^3 = 3 x^2
        let c = x.powu(3);
        assert_relative_eq!((c.d - 3.0 * x.v * x.v).norm(), 0.0, epsilon = 1e-12);
        // d/dt of 1/x = -1/x^2
        let r = Dual::one() / x;
        assert_relative_eq!((r.d + 1.0 / (x.v * x.v)).norm(), 0.0, epsilon = 1e-12);
        // |x|^2 has derivative 2 Re(conj(x) dx)
        let m = x * x.conj();
        assert_relative_eq!(m.d.re, 2.0 * (x.v.conj() * x.d).re, epsilon = 1e-12);
        assert_relative_eq!(m.d.im, 0.0, epsilon = 1e-12);
    }
}

//! Exact complex-rational coefficients.

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub type Q = BigRational;
pub type CQ = Complex<BigRational>;

pub fn q(n: i64, d: i64) -> Q {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    BigRational::from_integer(BigInt::from(n))
}

pub fn cq(re: Q, im: Q) -> CQ {
    Complex::new(re, im)
}

pub fn real(x: Q) -> CQ {
    Complex::new(x, Q::zero())
}

pub fn imag(x: Q) -> CQ {
    Complex::new(Q::zero(), x)
}

pub fn i_unit() -> CQ {
    Complex::new(Q::zero(), Q::one())
}

pub fn czero() -> CQ {
    Complex::new(Q::zero(), Q::zero())
}

pub fn is_real(c: &CQ) -> bool {
    c.im.is_zero()
}

pub fn is_imag(c: &CQ) -> bool {
    c.re.is_zero()
}

pub fn to_c64(c: &CQ) -> Complex64 {
    Complex64::new(c.re.to_f64().unwrap_or(f64::NAN), c.im.to_f64().unwrap_or(f64::NAN))
}

/// |c|^2, exact.
pub fn abs_sq(c: &CQ) -> Q {
    &c.re * &c.re + &c.im * &c.im
}

pub fn scale_q(c: &CQ, x: &Q) -> CQ {
    Complex::new(&c.re * x, &c.im * x)
}

/// Multiplication by i.
pub fn times_i(c: &CQ) -> CQ {
    Complex::new(-c.im.clone(), c.re.clone())
}

pub fn factorial(n: u32) -> Q {
    let mut f = BigInt::one();
    for k in 2..=n {
        f *= k;
    }
    BigRational::from_integer(f)
}

/// Coefficient written as a pair of exact fractions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FractionPair {
    pub re: String,
    pub im: String,
}

impl FractionPair {
    pub fn from_cq(c: &CQ) -> Self {
        FractionPair { re: c.re.to_string(), im: c.im.to_string() }
    }

    pub fn to_cq(&self) -> Option<CQ> {
        Some(Complex::new(parse_q(&self.re)?, parse_q(&self.im)?))
    }
}

pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n.trim().parse().ok()?, d))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

/// max(|x|) of a rational, as f64.
pub fn q_abs_f64(x: &Q) -> f64 {
    x.abs().to_f64().unwrap_or(f64::INFINITY)
}

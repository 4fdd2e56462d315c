//! Taylor fields P_{2l+1}, the Z_1 homological step, Lie transforms and the
//! resonant normal form up to order 7.

use super::exact::{i_unit, imag, q, qi, real, scale_q, CQ, Q};
use super::mono::{Kind, Mono};
use super::poly::{commutator_upto, order_of, z1, Parity, PolyVF};
use crate::error::{Error, Result};
use crate::space::IndexVector;
use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{One, Zero};
use std::collections::HashMap;

type Series = Vec<Q>;

fn series_mul(a: &Series, b: &Series, n: usize) -> Series {
    let mut out = vec![Q::zero(); n];
    for (i, x) in a.iter().enumerate().take(n) {
        if x.is_zero() {
            continue;
        }
        for (k, y) in b.iter().enumerate().take(n - i) {
            out[i + k] += x * y;
        }
    }
    out
}

/// (1 + u)^alpha for a series u with u_0 = 0, truncated to n terms.
fn series_binomial(u: &Series, alpha: &Q, n: usize) -> Series {
    let mut out = vec![Q::zero(); n];
    let mut pow = vec![Q::zero(); n];
    pow[0] = Q::one();
    let mut binom = Q::one();
    for k in 0..n {
        for (o, p) in out.iter_mut().zip(&pow) {
            *o += &binom * p;
        }
        binom = binom * (alpha - Q::from_integer(BigInt::from(k))) / Q::from_integer(BigInt::from(k + 1));
        pow = series_mul(&pow, u, n);
    }
    out
}

/// Taylor coefficients f_0, ..., f_{n-1} of f(y) = (1 + 2 phi(y))^{-3/2},
/// where phi inverts x sqrt(1 + 2x). The reversion is a fixed-point
/// iteration x <- y - (x sqrt(1 + 2x) - x), gaining one order per pass.
pub fn taylor_f(n: usize) -> Vec<Q> {
    let n = n.max(1);
    let mut y = vec![Q::zero(); n + 1];
    if n >= 1 {
        y[1] = Q::one();
    }
    let m = n + 1;
    let mut x = y.clone();
    for _ in 0..m {
        let two_x: Series = x.iter().map(|c| c * Q::from_integer(2.into())).collect();
        let g = series_mul(&x, &series_binomial(&two_x, &q(1, 2), m), m);
        x = (0..m).map(|i| &y[i] - (&g[i] - &x[i])).collect();
    }
    let two_x: Series = x.iter().map(|c| c * Q::from_integer(2.into())).collect();
    let mut f = series_binomial(&two_x, &q(-3, 2), m);
    f.truncate(n);
    f
}

type ScalarPoly = HashMap<Mono, Q>;

fn spoly_mul(a: &ScalarPoly, b: &ScalarPoly) -> ScalarPoly {
    let mut out = ScalarPoly::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            *out.entry(ma.mul(mb)).or_insert_with(Q::zero) += ca * cb;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn sq(b: u32, bar: bool) -> Mono {
    let v = Mono::var(b, bar);
    v.mul(&v)
}

/// P_{2l+1} on modes 1..=n:
/// -i f_{l-1} / 4^l (sum_b (z_b^2 + conj z_b^2 + 2 I_b)/b)^{l-1} (sum_b (z_b^2 - conj z_b^2)) conj(z_a).
pub fn taylor_vf(l: u32, n: u32) -> Result<PolyVF> {
    if !(1..=3).contains(&l) {
        return Err(Error::Domain(format!("taylor_vf supports 1 <= l <= 3, got {l}")));
    }
    let f = taylor_f(l as usize);
    let mut a_sum = ScalarPoly::new();
    let mut b_sum = ScalarPoly::new();
    for b in 1..=n {
        let inv = q(1, b as i64);
        a_sum.insert(sq(b, false), inv.clone());
        a_sum.insert(sq(b, true), inv.clone());
        a_sum.insert(Mono::var(b, false).mul(&Mono::var(b, true)), &inv * Q::from_integer(2.into()));
        b_sum.insert(sq(b, false), Q::one());
        b_sum.insert(sq(b, true), -Q::one());
    }
    let mut prod = b_sum;
    for _ in 1..l {
        prod = spoly_mul(&prod, &a_sum);
    }
    let pref = -(&f[l as usize - 1]) / Q::from_integer(BigInt::from(4u64.pow(l)));
    let mut out = PolyVF::new(Parity::Reversible).with_cutoff(n);
    for a in 1..=n {
        let za = Mono::var(a, true);
        for (m, c) in &prod {
            out.add_monomial(a, m.mul(&za), &imag(&pref * c));
        }
    }
    Ok(out)
}

/// Splits P into a generator chi and the resonant part K with [Z_1, chi] + P = K.
pub fn solve_homological_z1(p: &PolyVF) -> Result<(PolyVF, PolyVF)> {
    p.check_parity()?;
    let chi_parity = match p.parity {
        Parity::Reversible => Parity::AntiReversible,
        Parity::AntiReversible => Parity::Reversible,
        Parity::None => Parity::None,
    };
    let mut chi = PolyVF::new(chi_parity);
    let mut k = PolyVF::new(p.parity);
    chi.cutoff = p.cutoff;
    k.cutoff = p.cutoff;
    for (a, m, c) in p.monomials() {
        let w = m.frequency() - a as i64;
        if w == 0 {
            k.add_monomial(a, m.clone(), c);
        } else {
            let s = q(1, w);
            chi.add_monomial(a, m.clone(), &scale_q(&(&i_unit() * c), &s));
        }
    }
    Ok((chi, k))
}

/// e^{ad chi} X = sum_k ad^k X / k! with ad_chi X = [X, chi], keeping orders
/// <= max_order. Returns the truncated field and the smallest order among
/// the discarded pieces.
pub fn lie_transform(x: &PolyVF, chi: &PolyVF, max_order: u32) -> Result<(PolyVF, Option<u32>)> {
    let mut dropped: Option<u32> = None;
    let note = |f: &PolyVF, dropped: &mut Option<u32>| {
        for l in f.orders() {
            if l > max_order {
                *dropped = Some(dropped.map_or(l, |d: u32| d.min(l)));
            }
        }
    };
    let keep = |f: &PolyVF| f.filter(|_, m| order_of(m) <= max_order);
    note(x, &mut dropped);
    let mut total = keep(x);
    let mut t = total.clone();
    let mut k = 1u32;
    while !t.is_zero() && !chi.is_zero() {
        let (next, skipped) = commutator_upto(&t, chi, max_order)?;
        if let Some(l) = skipped {
            dropped = Some(dropped.map_or(l, |d: u32| d.min(l)));
        }
        note(&next, &mut dropped);
        t = keep(&next).scale_q(&q(1, k as i64));
        total = total.add(&t);
        k += 1;
    }
    total.parity = x.parity;
    Ok((total, dropped))
}

/// Output of the resonant normal-form iteration.
#[derive(Debug, Clone)]
pub struct ResonantNormalForm {
    pub r: u32,
    pub n: u32,
    /// K_3, K_5, ... up to K_{2r+1}
    pub k: Vec<PolyVF>,
    /// generators chi_3, chi_5, ...
    pub generators: Vec<PolyVF>,
    /// the full transformed field Z_1 + K_3 + ... truncated at order r
    pub field: PolyVF,
    /// lowest polynomial degree among discarded Lie-series tails
    pub remainder_min_degree: Option<u32>,
}

/// Iterates X <- e^{ad chi} X on X = Z_1 + P_3 + ... + P_{2r+1} over modes <= n.
pub fn resonant_normal_form(r: u32, n: u32) -> Result<ResonantNormalForm> {
    if !(1..=3).contains(&r) {
        return Err(Error::Domain(format!("resonant_normal_form supports r <= 3, got {r}")));
    }
    let mut x = z1(n);
    for l in 1..=r {
        x = x.add(&taylor_vf(l, n)?);
    }
    x.parity = Parity::Reversible;
    let mut generators = Vec::new();
    let mut dropped: Option<u32> = None;
    for l in 1..=r {
        let (chi, _) = solve_homological_z1(&x.part(l))?;
        let (nx, d) = lie_transform(&x, &chi, r)?;
        if let Some(d) = d {
            dropped = Some(dropped.map_or(d, |o: u32| o.min(d)));
        }
        x = nx;
        generators.push(chi);
    }
    let remainder_min_degree = dropped.map(|l| 2 * l + 1);
    if let Some(d) = remainder_min_degree {
        if d < 2 * r + 3 {
            return Err(Error::Structure(format!("Lie-series remainder of degree {d} below {}", 2 * r + 3)));
        }
    }
    let k = (1..=r).map(|l| x.part(l)).collect();
    Ok(ResonantNormalForm { r, n, k, generators, field: x, remainder_min_degree })
}

/// chi_3 = (1/8) sum conj(z_a) z_b^2 / (b - a) + conj(z_a) conj(z_b)^2 / (b + a).
pub fn chi3_explicit(n: u32) -> PolyVF {
    let mut out = PolyVF::new(Parity::AntiReversible).with_cutoff(n);
    for a in 1..=n {
        for b in 1..=n {
            if b != a {
                out.add_term(a, Kind::Anti, &IndexVector::from_pairs(&[(1, b)]), &real(q(1, 8 * (b as i64 - a as i64))));
            }
            out.add_term(a, Kind::Anti, &IndexVector::from_pairs(&[(-1, b)]), &real(q(1, 8 * (b + a) as i64)));
        }
    }
    out
}

/// K_3 = -(i/4) z_a I_a.
pub fn k3_expected(n: u32) -> PolyVF {
    let mut out = PolyVF::new(Parity::Reversible).with_cutoff(n);
    for a in 1..=n {
        out.add_term(a, Kind::Diag, &IndexVector::from_pairs(&[(0, a)]), &imag(q(-1, 4)));
    }
    out
}

/// Integrable quintic part, expanded literally from its sums:
/// i z_a (27/(64a) I_a^2 + 1/8 I_a sum_{d != a} (3/d + d/(d^2-a^2)) I_d - a/16 sum_{d != a} I_d^2/(d^2-a^2)).
pub fn z5_expected(n: u32) -> PolyVF {
    let mut out = PolyVF::new(Parity::Reversible).with_cutoff(n);
    for a in 1..=n {
        let ai = a as i64;
        out.add_term(a, Kind::Diag, &IndexVector::from_pairs(&[(0, a), (0, a)]), &imag(q(27, 64 * ai)));
        for d in (1..=n).filter(|&d| d != a) {
            let di = d as i64;
            let den = di * di - ai * ai;
            let c = (q(3, di) + q(di, den)) / qi(8);
            out.add_term(a, Kind::Diag, &IndexVector::from_pairs(&[(0, a), (0, d)]), &imag(c));
            out.add_term(a, Kind::Diag, &IndexVector::from_pairs(&[(0, d), (0, d)]), &imag(q(-ai, 16 * den)));
        }
    }
    out
}

/// Non-integrable quintic part, expanded literally:
/// i (3a/32) conj(z_a) (sum_{b1+b2=a} z_{b1}^2 z_{b2}^2/(b1 b2) + sum_{b-c=a, b<=n} 2 z_b^2 conj(z_c)^2/(b c)).
pub fn k5_anti_expected(n: u32) -> PolyVF {
    let mut out = PolyVF::new(Parity::Reversible).with_cutoff(n);
    for a in 1..=n {
        let ai = a as i64;
        for b1 in 1..a {
            let b2 = a - b1;
            let c = q(3 * ai, 32 * b1 as i64 * b2 as i64);
            out.add_term(a, Kind::Anti, &IndexVector::from_pairs(&[(1, b1), (1, b2)]), &imag(c));
        }
        for b in (a + 1)..=n {
            let c = b - a;
            let coef = q(2 * 3 * ai, 32 * b as i64 * c as i64);
            out.add_term(a, Kind::Anti, &IndexVector::from_pairs(&[(1, b), (-1, c)]), &imag(coef));
        }
    }
    out
}

pub fn k5_expected(n: u32) -> PolyVF {
    z5_expected(n).add(&k5_anti_expected(n))
}

/// Splits a polynomial field into its integrable part (z_a times actions)
/// and the rest.
pub fn split_integrable(p: &PolyVF) -> (PolyVF, PolyVF) {
    (p.filter(|a, m| m.is_z_times_actions(a)), p.filter(|a, m| !m.is_z_times_actions(a)))
}

/// i times a rational, for building expected coefficients.
pub fn i_times(x: Q) -> CQ {
    Complex::new(Q::zero(), x)
}

//! Monomials in (z, conj z) stored as sparse exponent lists.

use super::exact::{factorial, Q};
use super::scalar::Scalar;
use crate::space::{IndexVector, MonomialIndex};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Which factor multiplies zeta_j in the z_a component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    /// z_a zeta_j
    Diag,
    /// conj(z_a) zeta_j
    Anti,
}

/// prod_b z_b^p conj(z_b)^q as (b, p, q) sorted by b, zero exponents omitted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mono(Vec<(u32, u16, u16)>);

impl Mono {
    pub fn one() -> Self {
        Mono(Vec::new())
    }

    /// z_b, or conj(z_b) when `bar`.
    pub fn var(b: u32, bar: bool) -> Self {
        Mono(vec![if bar { (b, 0, 1) } else { (b, 1, 0) }])
    }

    pub fn from_index(j: &IndexVector) -> Self {
        let mut m = Mono::one();
        for e in j.entries() {
            let (p, q) = match e.delta {
                1 => (2, 0),
                -1 => (0, 2),
                _ => (1, 1),
            };
            m.bump(e.a, p, q);
        }
        m
    }

    /// z_a zeta_j or conj(z_a) zeta_j.
    pub fn from_kind_j(a: u32, kind: Kind, j: &IndexVector) -> Self {
        let mut m = Mono::from_index(j);
        match kind {
            Kind::Diag => m.bump(a, 1, 0),
            Kind::Anti => m.bump(a, 0, 1),
        }
        m
    }

    fn bump(&mut self, b: u32, p: u16, q: u16) {
        match self.0.binary_search_by_key(&b, |e| e.0) {
            Ok(i) => {
                self.0[i].1 += p;
                self.0[i].2 += q;
            }
            Err(i) => self.0.insert(i, (b, p, q)),
        }
    }

    pub fn entries(&self) -> &[(u32, u16, u16)] {
        &self.0
    }

    pub fn exps(&self, b: u32) -> (u16, u16) {
        match self.0.binary_search_by_key(&b, |e| e.0) {
            Ok(i) => (self.0[i].1, self.0[i].2),
            Err(_) => (0, 0),
        }
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|e| (e.1 + e.2) as u32).sum()
    }

    pub fn max_mode(&self) -> u32 {
        self.0.last().map_or(0, |e| e.0)
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        let (mut i, mut k) = (0, 0);
        let (x, y) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(x.len() + y.len());
        while i < x.len() || k < y.len() {
            if k == y.len() || (i < x.len() && x[i].0 < y[k].0) {
                out.push(x[i]);
                i += 1;
            } else if i == x.len() || y[k].0 < x[i].0 {
                out.push(y[k]);
                k += 1;
            } else {
                out.push((x[i].0, x[i].1 + y[k].1, x[i].2 + y[k].2));
                i += 1;
                k += 1;
            }
        }
        Mono(out)
    }

    /// d/dz_b (or d/dconj z_b): the exponent brought down and the reduced monomial.
    pub fn deriv(&self, b: u32, bar: bool) -> Option<(u16, Mono)> {
        let i = self.0.binary_search_by_key(&b, |e| e.0).ok()?;
        let e = self.0[i];
        let k = if bar { e.2 } else { e.1 };
        if k == 0 {
            return None;
        }
        let mut v = self.0.clone();
        if bar {
            v[i].2 -= 1;
        } else {
            v[i].1 -= 1;
        }
        if v[i].1 == 0 && v[i].2 == 0 {
            v.remove(i);
        }
        Some((k, Mono(v)))
    }

    pub fn conj(&self) -> Mono {
        Mono(self.0.iter().map(|&(b, p, q)| (b, q, p)).collect())
    }

    /// sum_b b (p_b - q_b): the Z_1 rotation frequency of the monomial.
    pub fn frequency(&self) -> i64 {
        self.0.iter().map(|&(b, p, q)| b as i64 * (p as i64 - q as i64)).sum()
    }

    /// True when the monomial is z_a times a product of actions.
    pub fn is_z_times_actions(&self, a: u32) -> bool {
        self.0.iter().all(|&(b, p, q)| if b == a { p == q + 1 } else { p == q })
    }

    /// Canonical (kind, j) in the z_a component: diag when z_a outnumbers
    /// conj(z_a), and each mode splits into as many actions as possible.
    pub fn canonical(&self, a: u32) -> Option<(Kind, IndexVector)> {
        let (pa, qa) = self.exps(a);
        let kind = if pa > qa { Kind::Diag } else { Kind::Anti };
        Some((kind, self.index_as(a, kind)?))
    }

    /// j with m = z_a zeta_j (diag) or conj(z_a) zeta_j (anti), actions maximal.
    pub fn index_as(&self, a: u32, kind: Kind) -> Option<IndexVector> {
        let (pa, qa) = self.exps(a);
        if (pa + qa) % 2 == 0 || (kind == Kind::Diag && pa == 0) || (kind == Kind::Anti && qa == 0) {
            return None;
        }
        let mut out = Vec::new();
        for &(b, p0, q0) in &self.0 {
            let (mut p, mut q) = (p0, q0);
            if b == a {
                match kind {
                    Kind::Diag => p -= 1,
                    Kind::Anti => q -= 1,
                }
            }
            if (p + q) % 2 == 1 {
                return None;
            }
            let t = p.min(q);
            out.extend(std::iter::repeat_n(MonomialIndex::new(0, b), t as usize));
            out.extend(std::iter::repeat_n(MonomialIndex::new(1, b), ((p - t) / 2) as usize));
            out.extend(std::iter::repeat_n(MonomialIndex::new(-1, b), ((q - t) / 2) as usize));
        }
        Some(IndexVector::new(out))
    }

    /// Number of ordered (kind, j) tuples whose product z_a zeta_j or
    /// conj(z_a) zeta_j equals this monomial.
    pub fn representations(&self, a: u32) -> Q {
        let mut total = Q::zero();
        let l = self.degree().saturating_sub(1) / 2;
        for kind in [Kind::Diag, Kind::Anti] {
            let (pa, qa) = self.exps(a);
            if (kind == Kind::Diag && pa == 0) || (kind == Kind::Anti && qa == 0) {
                continue;
            }
            let mut prod = factorial(l);
            for &(b, p0, q0) in &self.0 {
                let (mut p, mut q) = (p0, q0);
                if b == a {
                    match kind {
                        Kind::Diag => p -= 1,
                        Kind::Anti => q -= 1,
                    }
                }
                if (p + q) % 2 == 1 {
                    prod = Q::zero();
                    break;
                }
                let mut s = Q::zero();
                let mut t = p.min(q);
                loop {
                    if (p - t) % 2 == 0 {
                        let den = factorial(((p - t) / 2) as u32) * factorial(((q - t) / 2) as u32) * factorial(t as u32);
                        s += num_traits::Inv::inv(den);
                    }
                    if t == 0 {
                        break;
                    }
                    t -= 1;
                }
                prod *= s;
            }
            total += prod;
        }
        total
    }

    /// Value at z; `z[b - 1]` and `zc[b - 1]` hold z_b and its conjugate.
    pub fn eval<S: Scalar>(&self, z: &[S], zc: &[S]) -> S {
        let mut acc = S::one();
        for &(b, p, q) in &self.0 {
            let i = b as usize - 1;
            if i >= z.len() {
                return S::zero();
            }
            acc = acc * z[i].powu(p as u32) * zc[i].powu(q as u32);
        }
        acc
    }
}

impl fmt::Display for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, &(b, p, q)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            if p > 0 {
                write!(f, "z{b}^{p}")?;
            }
            if q > 0 {
                if p > 0 {
                    write!(f, "*")?;
                }
                write!(f, "zb{b}^{q}")?;
            }
        }
        Ok(())
    }
}

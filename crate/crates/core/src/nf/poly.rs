//! Polynomial vector fields with exact coefficients.
//!
//! Only the z_a components are stored; the conj(z_a) component is the
//! complex conjugate function. A term is a monomial in the z_a component
//! together with its full coefficient (all orderings of j folded in).

use super::exact::{abs_sq, is_imag, is_real, scale_q, CQ, Q};
use super::mono::{Kind, Mono};
use super::scalar::Scalar;
use crate::error::{Error, Result};
use crate::space::IndexVector;
use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    /// purely imaginary coefficients
    Reversible,
    /// purely real coefficients
    AntiReversible,
    None,
}

impl Parity {
    /// Parity of [X, Y].
    pub fn bracket(self, other: Parity) -> Parity {
        use Parity::*;
        match (self, other) {
            (Reversible, Reversible) | (AntiReversible, AntiReversible) => AntiReversible,
            (Reversible, AntiReversible) | (AntiReversible, Reversible) => Reversible,
            _ => None,
        }
    }

    pub fn admits(self, c: &CQ) -> bool {
        match self {
            Parity::Reversible => is_imag(c),
            Parity::AntiReversible => is_real(c),
            Parity::None => true,
        }
    }
}

/// Order l of a monomial of degree 2l + 1.
pub fn order_of(m: &Mono) -> u32 {
    m.degree().saturating_sub(1) / 2
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyVF {
    terms: BTreeMap<(u32, Mono), CQ>,
    pub parity: Parity,
    pub cutoff: Option<u32>,
}

impl PolyVF {
    pub fn new(parity: Parity) -> Self {
        PolyVF { terms: BTreeMap::new(), parity, cutoff: None }
    }

    pub fn with_cutoff(mut self, n: u32) -> Self {
        self.cutoff = Some(n);
        self
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `c` to the coefficient of monomial `m` in the z_a component.
    pub fn add_monomial(&mut self, a: u32, m: Mono, c: &CQ) {
        if c.is_zero() {
            return;
        }
        let key = (a, m);
        let slot = self.terms.entry(key.clone()).or_insert_with(|| Complex::new(Q::zero(), Q::zero()));
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    /// Adds c z_a zeta_j (diag) or c conj(z_a) zeta_j (anti).
    pub fn add_term(&mut self, a: u32, kind: Kind, j: &IndexVector, c: &CQ) {
        self.add_monomial(a, Mono::from_kind_j(a, kind, j), c);
    }

    /// Coefficient of the monomial z_a zeta_j or conj(z_a) zeta_j.
    pub fn coefficient(&self, a: u32, kind: Kind, j: &IndexVector) -> CQ {
        self.terms
            .get(&(a, Mono::from_kind_j(a, kind, j)))
            .cloned()
            .unwrap_or_else(|| Complex::new(Q::zero(), Q::zero()))
    }

    /// Coefficient per ordering of j: the monomial coefficient over the
    /// number of distinct orderings of j.
    pub fn symmetric_coefficient(&self, a: u32, kind: Kind, j: &IndexVector) -> CQ {
        let p = Q::from_integer(BigInt::from(j.permutations()));
        let c = self.coefficient(a, kind, j);
        Complex::new(c.re / &p, c.im / &p)
    }

    pub fn monomials(&self) -> impl Iterator<Item = (u32, &Mono, &CQ)> {
        self.terms.iter().map(|((a, m), c)| (*a, m, c))
    }

    /// Terms as (a, kind, j, coefficient) in canonical form.
    pub fn canonical_terms(&self) -> Vec<(u32, Kind, IndexVector, CQ)> {
        self.terms
            .iter()
            .map(|((a, m), c)| {
                let (k, j) = m.canonical(*a).expect("stored monomials are well formed");
                (*a, k, j, c.clone())
            })
            .collect()
    }

    pub fn orders(&self) -> BTreeSet<u32> {
        self.terms.keys().map(|(_, m)| order_of(m)).collect()
    }

    /// The homogeneous part of order l.
    pub fn part(&self, l: u32) -> PolyVF {
        self.filter(|_, m| order_of(m) == l)
    }

    pub fn filter(&self, keep: impl Fn(u32, &Mono) -> bool) -> PolyVF {
        PolyVF {
            terms: self.terms.iter().filter(|((a, m), _)| keep(*a, m)).map(|(k, c)| (k.clone(), c.clone())).collect(),
            parity: self.parity,
            cutoff: self.cutoff,
        }
    }

    /// Drops components and modes above n.
    pub fn restrict_modes(&self, n: u32) -> PolyVF {
        let mut out = self.filter(|a, m| a <= n && m.max_mode() <= n);
        out.cutoff = Some(n);
        out
    }

    pub fn add(&self, other: &PolyVF) -> PolyVF {
        let mut out = self.clone();
        for ((a, m), c) in &other.terms {
            out.add_monomial(*a, m.clone(), c);
        }
        if self.parity != other.parity {
            out.parity = if self.is_zero() { other.parity } else if other.is_zero() { self.parity } else { Parity::None };
        }
        out.cutoff = min_cutoff(self.cutoff, other.cutoff);
        out
    }

    pub fn sub(&self, other: &PolyVF) -> PolyVF {
        self.add(&other.scale(&Complex::new(Q::from_integer((-1).into()), Q::zero())))
    }

    pub fn scale(&self, s: &CQ) -> PolyVF {
        let mut out = PolyVF::new(self.parity);
        out.cutoff = self.cutoff;
        for ((a, m), c) in &self.terms {
            out.add_monomial(*a, m.clone(), &(c * s));
        }
        if !s.im.is_zero() {
            out.parity = match (self.parity, s.re.is_zero()) {
                (Parity::Reversible, true) => Parity::AntiReversible,
                (Parity::AntiReversible, true) => Parity::Reversible,
                _ => Parity::None,
            };
        }
        out
    }

    pub fn scale_q(&self, x: &Q) -> PolyVF {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = scale_q(c, x);
        }
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    /// Verifies that every coefficient matches the declared parity.
    pub fn check_parity(&self) -> Result<()> {
        for ((a, m), c) in &self.terms {
            if !self.parity.admits(c) {
                return Err(Error::Structure(format!(
                    "coefficient {c} of {m} in component {a} violates parity {:?}",
                    self.parity
                )));
            }
        }
        Ok(())
    }

    /// Parity read off the coefficients.
    pub fn detect_parity(&self) -> Parity {
        if self.terms.values().all(is_imag) {
            Parity::Reversible
        } else if self.terms.values().all(is_real) {
            Parity::AntiReversible
        } else {
            Parity::None
        }
    }

    /// sup over ordered index tuples of the symmetric coefficient, with each
    /// monomial coefficient spread evenly over its representations.
    pub fn norm(&self) -> f64 {
        self.terms
            .iter()
            .map(|((a, m), c)| {
                let r = m.representations(*a).to_f64().unwrap_or(f64::NAN);
                abs_sq(c).to_f64().unwrap_or(f64::INFINITY).sqrt() / r
            })
            .fold(0.0, f64::max)
    }

    /// Evaluates the z_a components for a = 1..=z.len().
    pub fn evaluate<S: Scalar>(&self, z: &[S]) -> Vec<S> {
        let zc: Vec<S> = z.iter().map(|x| x.conj()).collect();
        let mut out = vec![S::zero(); z.len()];
        let mut cache: HashMap<&CQ, num_complex::Complex64> = HashMap::new();
        for ((a, m), c) in &self.terms {
            let i = *a as usize - 1;
            if i >= z.len() {
                continue;
            }
            let cf = *cache.entry(c).or_insert_with(|| super::exact::to_c64(c));
            out[i] += m.eval(z, &zc).scale(cf);
        }
        out
    }

    fn component(&self, b: u32) -> impl Iterator<Item = (&Mono, &CQ)> {
        self.terms.range((b, Mono::one())..(b + 1, Mono::one())).map(|((_, m), c)| (m, c))
    }
}

fn min_cutoff(a: Option<u32>, b: Option<u32>) -> Option<u32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// DX[Y]: derivative of X along Y.
pub fn directional(x: &PolyVF, y: &PolyVF) -> PolyVF {
    let mut acc: HashMap<(u32, Mono), CQ> = HashMap::new();
    let yc: BTreeMap<u32, Vec<(Mono, CQ)>> = {
        let mut g: BTreeMap<u32, Vec<(Mono, CQ)>> = BTreeMap::new();
        for ((b, m), c) in &y.terms {
            g.entry(*b).or_default().push((m.conj(), c.conj()));
        }
        g
    };
    for ((a, m), c) in &x.terms {
        for &(b, p, q) in m.entries() {
            if p > 0 {
                let (k, dm) = m.deriv(b, false).expect("exponent present");
                let ck = scale_q(c, &Q::from_integer(k.into()));
                for (my, cy) in y.component(b) {
                    let key = (*a, dm.mul(my));
                    *acc.entry(key).or_insert_with(|| Complex::new(Q::zero(), Q::zero())) += &ck * cy;
                }
            }
            if q > 0 {
                let (k, dm) = m.deriv(b, true).expect("exponent present");
                let ck = scale_q(c, &Q::from_integer(k.into()));
                if let Some(list) = yc.get(&b) {
                    for (my, cy) in list {
                        let key = (*a, dm.mul(my));
                        *acc.entry(key).or_insert_with(|| Complex::new(Q::zero(), Q::zero())) += &ck * cy;
                    }
                }
            }
        }
    }
    let mut out = PolyVF::new(Parity::None);
    out.terms = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    out.cutoff = min_cutoff(x.cutoff, y.cutoff);
    out
}

/// [X, Y] = DX[Y] - DY[X], without parity or bound checks.
pub fn bracket(x: &PolyVF, y: &PolyVF) -> PolyVF {
    let mut out = directional(x, y).sub(&directional(y, x));
    out.parity = x.parity.bracket(y.parity);
    out
}

/// Commutator with parity checks on inputs and output and the coefficient
/// bound ||[X,Y]|| <= 6 (l1 + l2 + 1) ||X|| ||Y|| checked on every pair of
/// homogeneous parts.
pub fn commutator(x: &PolyVF, y: &PolyVF) -> Result<PolyVF> {
    Ok(commutator_upto(x, y, u32::MAX)?.0)
}

/// As [`commutator`], skipping pairs of homogeneous parts whose bracket has
/// order above `max_order`; the smallest skipped order is returned.
pub fn commutator_upto(x: &PolyVF, y: &PolyVF, max_order: u32) -> Result<(PolyVF, Option<u32>)> {
    x.check_parity()?;
    y.check_parity()?;
    let parity = x.parity.bracket(y.parity);
    let mut out = PolyVF::new(parity);
    out.cutoff = min_cutoff(x.cutoff, y.cutoff);
    let mut skipped: Option<u32> = None;
    for l1 in x.orders() {
        let xp = x.part(l1);
        let nx = xp.norm();
        for l2 in y.orders() {
            if l1.saturating_add(l2) > max_order {
                skipped = Some(skipped.map_or(l1 + l2, |s: u32| s.min(l1 + l2)));
                continue;
            }
            let yp = y.part(l2);
            let b = bracket(&xp, &yp);
            let bound = 6.0 * (l1 + l2 + 1) as f64 * nx * yp.norm();
            let nb = b.norm();
            if nb > bound * (1.0 + 1e-12) {
                return Err(Error::Structure(format!(
                    "commutator norm {nb:e} exceeds the bound {bound:e} at orders ({l1}, {l2})"
                )));
            }
            for ((a, m), c) in b.terms {
                out.add_monomial(a, m, &c);
            }
        }
    }
    if parity != Parity::None {
        out.check_parity()?;
    }
    Ok((out, skipped))
}

/// Z_1^{(a)} = -i a z_a for a <= n.
pub fn z1(n: u32) -> PolyVF {
    let mut out = PolyVF::new(Parity::Reversible).with_cutoff(n);
    for a in 1..=n {
        out.add_monomial(a, Mono::var(a, false), &Complex::new(Q::zero(), Q::from_integer(BigInt::from(-(a as i64)))));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nf::exact::{imag, q, qi, real};

    fn term(a: u32, kind: Kind, j: &[(i8, u32)], c: CQ, parity: Parity) -> PolyVF {
        let mut p = PolyVF::new(parity);
        p.add_term(a, kind, &IndexVector::from_pairs(j), &c);
        p
    }

    #[test]
    fn bracket_with_zero() {
        let x = term(1, Kind::Anti, &[(1, 2)], imag(qi(1)), Parity::Reversible);
        let zero = PolyVF::new(Parity::AntiReversible);
        assert!(commutator(&x, &zero).unwrap().is_zero());
    }

    #[test]
    fn z1_rotation_factor() {
        // [Z1, chi] multiplies a term by i (omega(m) - a).
        let chi = term(2, Kind::Anti, &[(1, 3), (-1, 1)], real(qi(5)), Parity::AntiReversible);
        let b = commutator(&z1(4), &chi).unwrap();
        let m = Mono::from_kind_j(2, Kind::Anti, &IndexVector::from_pairs(&[(1, 3), (-1, 1)]));
        let w = m.frequency() - 2;
        // omega(m) = 2 here, so the anti term is resonant and drops out
        assert_eq!(w, 0);
        let chi = term(1, Kind::Diag, &[(1, 3), (-1, 1)], real(qi(5)), Parity::AntiReversible);
        let b2 = commutator(&z1(4), &chi).unwrap();
        assert_eq!(b2.coefficient(1, Kind::Diag, &IndexVector::from_pairs(&[(1, 3), (-1, 1)])), imag(qi(5 * 4)));
        assert!(b.is_zero());
    }

    #[test]
    fn antisymmetry_and_linearity() {
        let x = term(1, Kind::Anti, &[(1, 2)], imag(q(1, 3)), Parity::Reversible)
            .add(&term(2, Kind::Diag, &[(0, 1)], imag(qi(2)), Parity::Reversible));
        let y = term(2, Kind::Anti, &[(-1, 1)], real(q(-1, 2)), Parity::AntiReversible);
        let xy = bracket(&x, &y);
        let yx = bracket(&y, &x);
        assert!(xy.add(&yx).is_zero());
    }

    #[test]
    fn evaluation_matches_definition() {
        let x = term(1, Kind::Anti, &[(1, 2)], imag(qi(1)), Parity::Reversible);
        let z = [num_complex::Complex64::new(0.3, 0.1), num_complex::Complex64::new(-0.2, 0.4)];
        let v = x.evaluate(&z);
        let expect = num_complex::Complex64::i() * z[0].conj() * z[1] * z[1];
        assert!((v[0] - expect).norm() < 1e-15);
        assert_eq!(v[1], num_complex::Complex64::new(0.0, 0.0));
    }

    #[test]
    fn parity_violation_is_reported() {
        let x = term(1, Kind::Anti, &[(1, 2)], real(qi(1)), Parity::Reversible);
        assert!(commutator(&x, &PolyVF::new(Parity::AntiReversible)).is_err());
    }
}

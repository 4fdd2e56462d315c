//! Rational vector fields: resonant monomials over products of small divisors.
//!
//! A term in the z_a component is c m(z) / (prod_h2 Omega2_h prod_h4 Omega4_h
//! prod_k Omega4_k). Divisors are stored as index vectors and bound to
//! actions only at evaluation time. A divisor with Delta = 0 is stored as the
//! smaller of h and conj(h) and the sign change is folded into c.

use super::exact::{abs_sq, czero, is_imag, scale_q, to_c64, CQ, Q};
use super::mono::Mono;
use super::poly::{Parity, PolyVF};
use super::scalar::Scalar;
use crate::divisors::{irr_unchecked, kappa, normalize_divisor, omega2_linear, omega4_monomials, omega4_quadratic};
use crate::error::{Error, Result};
use crate::space::{IndexVector, WeightSpec};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

/// Refusal threshold for |Omega| relative to ||z||^2.
pub const DIVISOR_REL_FLOOR: f64 = 1e-12;
pub const DIVISOR_ABS_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Slot {
    /// Omega^(2) divisor counted in h
    H2,
    /// Omega^(4) divisor counted in h
    H4,
    /// Omega^(4) divisor counted in k
    K,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Denominator {
    pub h2: Vec<IndexVector>,
    pub h4: Vec<IndexVector>,
    pub k: Vec<IndexVector>,
}

impl Denominator {
    pub fn none() -> Self {
        Denominator::default()
    }

    pub fn is_empty(&self) -> bool {
        self.h2.is_empty() && self.h4.is_empty() && self.k.is_empty()
    }

    /// n = number of Omega^(2) divisors.
    pub fn n(&self) -> usize {
        self.h2.len()
    }

    pub fn h_count(&self) -> usize {
        self.h2.len() + self.h4.len()
    }

    pub fn k_count(&self) -> usize {
        self.k.len()
    }

    pub fn h(&self) -> impl Iterator<Item = &IndexVector> {
        self.h2.iter().chain(&self.h4)
    }

    pub fn all(&self) -> impl Iterator<Item = (Slot, &IndexVector)> {
        self.h2
            .iter()
            .map(|h| (Slot::H2, h))
            .chain(self.h4.iter().map(|h| (Slot::H4, h)))
            .chain(self.k.iter().map(|h| (Slot::K, h)))
    }

    pub fn merge(&self, o: &Denominator) -> Denominator {
        let join = |x: &Vec<IndexVector>, y: &Vec<IndexVector>| {
            let mut v = x.clone();
            v.extend(y.iter().cloned());
            v.sort();
            v
        };
        Denominator { h2: join(&self.h2, &o.h2), h4: join(&self.h4, &o.h4), k: join(&self.k, &o.k) }
    }

    /// Appends an already normalized divisor.
    pub fn push(&self, slot: Slot, h: IndexVector) -> Denominator {
        let mut d = self.clone();
        let v = match slot {
            Slot::H2 => &mut d.h2,
            Slot::H4 => &mut d.h4,
            Slot::K => &mut d.k,
        };
        let pos = v.binary_search(&h).unwrap_or_else(|p| p);
        v.insert(pos, h);
        d
    }

    fn orderings(&self) -> u128 {
        [&self.h2, &self.h4, &self.k].iter().map(|v| multiset_orderings(v)).product()
    }
}

fn multiset_orderings<T: PartialEq>(v: &[T]) -> u128 {
    let mut n: u128 = 1;
    let mut run = 0u128;
    for (i, x) in v.iter().enumerate() {
        run = if i > 0 && v[i - 1] == *x { run + 1 } else { 1 };
        n = n * (i as u128 + 1) / run;
    }
    n
}

/// Normalizes `h` and appends it; returns the new denominator and whether the sign flipped.
pub fn push_divisor(den: &Denominator, slot: Slot, h: &IndexVector) -> (Denominator, bool) {
    let (h, flip) = normalize_divisor(h);
    (den.push(slot, h), flip)
}

pub type RKey = (u32, Mono, Denominator);

#[derive(Debug, Clone, PartialEq)]
pub struct RationalVF {
    terms: BTreeMap<RKey, CQ>,
    pub parity: Parity,
    /// cutoff N: divisors read actions of modes <= N
    pub n: u32,
}

/// Structural summary of a rational field.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub terms: usize,
    pub orders: Vec<i64>,
    pub max_h: usize,
    pub max_k: usize,
}

impl RationalVF {
    pub fn new(parity: Parity, n: u32) -> Self {
        RationalVF { terms: BTreeMap::new(), parity, n }
    }

    pub fn from_poly(p: &PolyVF, n: u32) -> Self {
        let mut out = RationalVF::new(p.parity, n);
        for (a, m, c) in p.monomials() {
            out.add(a, m.clone(), Denominator::none(), c);
        }
        out
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

    pub fn terms(&self) -> impl Iterator<Item = (&RKey, &CQ)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, a: u32, m: &Mono, den: &Denominator) -> CQ {
        self.terms.get(&(a, m.clone(), den.clone())).cloned().unwrap_or_else(czero)
    }

    pub fn add(&mut self, a: u32, m: Mono, den: Denominator, c: &CQ) {
        if c.is_zero() {
            return;
        }
        let key = (a, m, den);
        let slot = self.terms.entry(key.clone()).or_insert_with(czero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn plus(&self, o: &RationalVF) -> RationalVF {
        let mut out = self.clone();
        for ((a, m, d), c) in &o.terms {
            out.add(*a, m.clone(), d.clone(), c);
        }
        if self.parity != o.parity {
            out.parity = if self.is_zero() { o.parity } else if o.is_zero() { self.parity } else { Parity::None };
        }
        out
    }

    pub fn scale_q(&self, x: &Q) -> RationalVF {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = scale_q(c, x);
        }
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    pub fn minus(&self, o: &RationalVF) -> RationalVF {
        self.plus(&o.scale_q(&Q::from_integer(BigInt::from(-1))))
    }

    pub fn filter(&self, keep: impl Fn(&RKey) -> bool) -> RationalVF {
        RationalVF {
            terms: self.terms.iter().filter(|(k, _)| keep(k)).map(|(k, c)| (k.clone(), c.clone())).collect(),
            parity: self.parity,
            n: self.n,
        }
    }

    /// Divisor-free terms as a polynomial field.
    pub fn polynomial_part(&self) -> PolyVF {
        let mut p = PolyVF::new(self.parity).with_cutoff(self.n);
        for ((a, m, d), c) in &self.terms {
            if d.is_empty() {
                p.add_monomial(*a, m.clone(), c);
            }
        }
        p
    }

    pub fn check_parity(&self) -> Result<()> {
        for ((a, m, _), c) in &self.terms {
            if !self.parity.admits(c) {
                return Err(Error::Structure(format!(
                    "coefficient {c} of {m} in component {a} violates parity {:?}",
                    self.parity
                )));
            }
        }
        Ok(())
    }

    /// sup of |c| over ordered representations of (j, h, k).
    pub fn norm(&self) -> f64 {
        self.terms
            .iter()
            .map(|((a, m, d), c)| {
                let r = m.representations(*a).to_f64().unwrap_or(f64::NAN) * d.orderings() as f64;
                abs_sq(c).to_f64().unwrap_or(f64::INFINITY).sqrt() / r
            })
            .fold(0.0, f64::max)
    }

    /// Checks Z_1 resonance, irreducibility and size of divisors, the order
    /// bookkeeping and the control condition on every term.
    pub fn check_structure(&self, weight: &WeightSpec) -> Result<StructureReport> {
        let mut rep = StructureReport { terms: self.terms.len(), ..Default::default() };
        for (a, m, d) in self.terms.keys() {
            let info = term_info(*a, m, d, self.n)?;
            if !control_condition(m, d, weight, false) {
                return Err(Error::Structure(format!("control condition fails for {m} / {d:?} in component {a}")));
            }
            if !rep.orders.contains(&info) {
                rep.orders.push(info);
            }
            rep.max_h = rep.max_h.max(d.h_count());
            rep.max_k = rep.max_k.max(d.k_count());
        }
        rep.orders.sort_unstable();
        Ok(rep)
    }

    /// Evaluates the z_a components for a = 1..=z.len().
    pub fn evaluate<S: Scalar>(&self, z: &[S]) -> Result<Vec<S>> {
        self.compile().evaluate(z)
    }

    pub fn compile(&self) -> Compiled {
        let mut c = Compiled::new(self.n);
        for ((a, m, d), coef) in &self.terms {
            let den = c.intern_den(d);
            c.terms.push((*a, m.clone(), den, to_c64(coef)));
        }
        c
    }

    /// True when every term can be written z_a zeta_j / den with an imaginary
    /// coefficient equal to that of z_a zeta_{conj j} / den.
    pub fn is_rational_normal_form(&self) -> bool {
        for ((a, m, d), c) in &self.terms {
            if m.exps(*a).0 == 0 || m.canonical(*a).is_none() {
                return false;
            }
            if !is_imag(c) {
                return false;
            }
            let partner = conj_partner(*a, m);
            if self.coefficient(*a, &partner, d) != *c {
                return false;
            }
        }
        true
    }
}

/// z_a zeta_{conj j} for a diag monomial z_a zeta_j.
fn conj_partner(a: u32, m: &Mono) -> Mono {
    let za = Mono::var(a, false);
    let (_, rest) = m.deriv(a, false).expect("diag monomial");
    rest.conj().mul(&za)
}

/// Order #j - #h - 2 #k of a term, after checking the index conditions.
pub fn term_info(a: u32, m: &Mono, d: &Denominator, n: u32) -> Result<i64> {
    let (_, j) = m
        .canonical(a)
        .ok_or_else(|| Error::Structure(format!("{m} is not of the form z_a zeta_j in component {a}")))?;
    if m.frequency() != a as i64 {
        return Err(Error::Structure(format!("{m} is not resonant in component {a}")));
    }
    for (_, h) in d.all() {
        let dh = h.delta();
        if dh < 0 || dh as u32 > n || h.max_mode().unwrap_or(0) > n {
            return Err(Error::Structure(format!("divisor {h} out of range for N = {n}")));
        }
        if irr_unchecked(h, dh) != *h {
            return Err(Error::Structure(format!("divisor {h} is not irreducible")));
        }
        if h.len() < 2 || h.len() > j.len() {
            return Err(Error::Structure(format!("divisor {h} has length outside [2, #j = {}]", j.len())));
        }
    }
    Ok(j.len() as i64 - d.h_count() as i64 - 2 * d.k_count() as i64)
}

/// prod kappa_h <= prod j^* (or, with `strong`, prod over j^* without the
/// largest mode). Gevrey weights use sums of theta-th powers instead.
pub fn control_condition(m: &Mono, d: &Denominator, weight: &WeightSpec, strong: bool) -> bool {
    let mut modes: Vec<u32> = Vec::new();
    // modes of j counted once per zeta factor: the z_a factor is not part of j
    let a_dummy = m
        .entries()
        .iter()
        .find(|e| (e.1 + e.2) % 2 == 1)
        .map(|e| e.0)
        .unwrap_or(0);
    for &(b, p, q) in m.entries() {
        let mut e = (p + q) as u32;
        if b == a_dummy {
            e -= 1;
        }
        modes.extend(std::iter::repeat_n(b, (e / 2) as usize));
    }
    modes.sort_unstable_by(|x, y| y.cmp(x));
    if strong && !modes.is_empty() {
        modes.remove(0);
    }
    let kappas: Vec<u32> = d.h().map(|h| kappa(h).unwrap_or(0)).collect();
    match weight {
        WeightSpec::Gevrey { theta, .. } => {
            let lhs: f64 = kappas.iter().map(|&k| (k as f64).powf(*theta)).sum();
            let rhs: f64 = modes.iter().map(|&k| (k as f64).powf(*theta)).sum();
            lhs <= rhs * (1.0 + 1e-12)
        }
        WeightSpec::Sobolev { .. } => {
            let lhs: u128 = kappas.iter().map(|&k| k as u128).product();
            let rhs: u128 = modes.iter().map(|&k| k as u128).product();
            lhs <= rhs
        }
    }
}

/// Scalar rational function: sum of c m(z) / den.
pub type RScalar = HashMap<(Mono, Denominator), CQ>;

/// DI_b[Y] = conj(z_b) Y^{(b)} + z_b conj(Y^{(b)}).
pub fn di_symbolic(y: &RationalVF, b: u32) -> RScalar {
    let mut out = RScalar::new();
    let zb = Mono::var(b, false);
    let zbb = Mono::var(b, true);
    for ((a, m, d), c) in y.terms.range((b, Mono::one(), Denominator::none())..(b + 1, Mono::one(), Denominator::none())) {
        debug_assert_eq!(*a, b);
        *out.entry((m.mul(&zbb), d.clone())).or_insert_with(czero) += c;
        *out.entry((m.conj().mul(&zb), d.clone())).or_insert_with(czero) += c.conj();
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// DI_b for a polynomial field, exactly.
pub fn di_poly(p: &PolyVF, b: u32) -> HashMap<Mono, CQ> {
    di_symbolic(&RationalVF::from_poly(p, b.max(p.cutoff.unwrap_or(b))), b)
        .into_iter()
        .map(|((m, _), c)| (m, c))
        .collect()
}

struct DerivTables {
    n: u32,
    lin: HashMap<IndexVector, Vec<(u32, Q)>>,
    /// d -> list of (e, c): d Omega4_h / d I_d contains c I_e
    quad: HashMap<IndexVector, Vec<(u32, u32, Q)>>,
}

impl DerivTables {
    fn new(n: u32) -> Self {
        DerivTables { n, lin: HashMap::new(), quad: HashMap::new() }
    }

    fn linear(&mut self, h: &IndexVector) -> &Vec<(u32, Q)> {
        let n = self.n;
        self.lin.entry(h.clone()).or_insert_with(|| omega2_linear(h, n).into_iter().collect())
    }

    /// (d, e, c) meaning d Omega_h / d I_d has the term c I_e.
    fn quadratic(&mut self, h: &IndexVector) -> &Vec<(u32, u32, Q)> {
        let n = self.n;
        self.quad.entry(h.clone()).or_insert_with(|| {
            let mut v = Vec::new();
            for ((d, e), c) in omega4_quadratic(h, n) {
                if d == e {
                    v.push((d, d, &c * Q::from_integer(BigInt::from(2))));
                } else {
                    v.push((d, e, c.clone()));
                    v.push((e, d, c));
                }
            }
            v
        })
    }
}

fn accumulate(acc: &mut HashMap<RKey, CQ>, key: RKey, c: CQ) {
    *acc.entry(key).or_insert_with(czero) += c;
}

/// DX[Y] for rational fields sharing the cutoff N.
pub fn directional(x: &RationalVF, y: &RationalVF) -> RationalVF {
    let n = x.n;
    let mut acc: HashMap<RKey, CQ> = HashMap::new();
    let mut by_comp: BTreeMap<u32, Vec<(&Mono, &Denominator, &CQ)>> = BTreeMap::new();
    for ((b, m, d), c) in &y.terms {
        by_comp.entry(*b).or_default().push((m, d, c));
    }
    let conj_comp: BTreeMap<u32, Vec<(Mono, &Denominator, CQ)>> =
        by_comp.iter().map(|(b, v)| (*b, v.iter().map(|(m, d, c)| (m.conj(), *d, c.conj())).collect())).collect();
    let mut di_cache: HashMap<u32, RScalar> = HashMap::new();
    let mut tables = DerivTables::new(n);
    for ((a, m, d), c) in &x.terms {
        // numerator
        for &(b, p, q) in m.entries() {
            if p > 0 {
                if let (Some((k, dm)), Some(list)) = (m.deriv(b, false), by_comp.get(&b)) {
                    let ck = scale_q(c, &Q::from_integer(k.into()));
                    for (my, dy, cy) in list {
                        accumulate(&mut acc, (*a, dm.mul(my), d.merge(dy)), &ck * *cy);
                    }
                }
            }
            if q > 0 {
                if let (Some((k, dm)), Some(list)) = (m.deriv(b, true), conj_comp.get(&b)) {
                    let ck = scale_q(c, &Q::from_integer(k.into()));
                    for (my, dy, cy) in list {
                        accumulate(&mut acc, (*a, dm.mul(my), d.merge(dy)), &ck * cy);
                    }
                }
            }
        }
        // divisors: -c m / (den Omega_h) * sum_d dOmega_h/dI_d DI_d[Y]
        for (slot, h) in d.all() {
            let lin_slot = if slot == Slot::H2 { Slot::H2 } else { Slot::H4 };
            let dup_lin = d.push(lin_slot, h.clone());
            for (dd, lc) in tables.linear(h).clone() {
                let di = di_cache.entry(dd).or_insert_with(|| di_symbolic(y, dd));
                for ((ms, ds), cs) in di.iter() {
                    let coef = scale_q(&(c * cs), &(-lc.clone()));
                    accumulate(&mut acc, (*a, m.mul(ms), dup_lin.merge(ds)), coef);
                }
            }
            if slot != Slot::H2 {
                let dup_k = d.push(Slot::K, h.clone());
                for (dd, e, qc) in tables.quadratic(h).clone() {
                    let ie = Mono::var(e, false).mul(&Mono::var(e, true));
                    let di = di_cache.entry(dd).or_insert_with(|| di_symbolic(y, dd));
                    for ((ms, ds), cs) in di.iter() {
                        let coef = scale_q(&(c * cs), &(-qc.clone()));
                        accumulate(&mut acc, (*a, m.mul(&ie).mul(ms), dup_k.merge(ds)), coef);
                    }
                }
            }
        }
    }
    let mut out = RationalVF::new(Parity::None, n);
    out.terms = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    out
}

/// [X, Y] = DX[Y] - DY[X].
pub fn rational_bracket(x: &RationalVF, y: &RationalVF) -> Result<RationalVF> {
    if x.n != y.n {
        return Err(Error::Structure(format!("cutoffs differ: {} vs {}", x.n, y.n)));
    }
    let mut out = directional(x, y).minus(&directional(y, x));
    out.parity = x.parity.bracket(y.parity);
    Ok(out)
}

/// Symbolic commutator with parity checks and structure checks on inputs and output.
pub fn rational_commutator(x: &RationalVF, y: &RationalVF, weight: &WeightSpec) -> Result<RationalVF> {
    x.check_parity()?;
    y.check_parity()?;
    let sx = x.check_structure(weight)?;
    let sy = y.check_structure(weight)?;
    let out = rational_bracket(x, y)?;
    out.check_parity()?;
    let so = out.check_structure(weight)?;
    if sx.orders.len() == 1 && sy.orders.len() == 1 && !out.is_zero() {
        let l = sx.orders[0] + sy.orders[0];
        if so.orders != vec![l] {
            return Err(Error::Structure(format!("commutator orders {:?}, expected {l}", so.orders)));
        }
    }
    Ok(out)
}

/// Which frequencies a divisor uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum DivKind {
    Two,
    Four,
}

/// A rational field prepared for repeated numeric evaluation.
#[derive(Debug, Clone)]
pub struct Compiled {
    n: u32,
    divisors: Vec<(IndexVector, DivKind)>,
    div_index: HashMap<(IndexVector, DivKind), usize>,
    dens: Vec<Vec<usize>>,
    den_index: HashMap<Denominator, usize>,
    terms: Vec<(u32, Mono, usize, Complex64)>,
    w4: Vec<Vec<(u32, u32, f64)>>,
}

impl Compiled {
    fn new(n: u32) -> Self {
        let w4 = (0..=n)
            .map(|a| {
                omega4_monomials(a, n)
                    .into_iter()
                    .map(|(d, e, c)| (d, e, c.to_f64().unwrap_or(f64::NAN)))
                    .collect()
            })
            .collect();
        Compiled {
            n,
            divisors: Vec::new(),
            div_index: HashMap::new(),
            dens: Vec::new(),
            den_index: HashMap::new(),
            terms: Vec::new(),
            w4,
        }
    }

    fn intern_div(&mut self, h: &IndexVector, k: DivKind) -> usize {
        if let Some(&i) = self.div_index.get(&(h.clone(), k)) {
            return i;
        }
        self.divisors.push((h.clone(), k));
        self.div_index.insert((h.clone(), k), self.divisors.len() - 1);
        self.divisors.len() - 1
    }

    fn intern_den(&mut self, d: &Denominator) -> usize {
        if let Some(&i) = self.den_index.get(d) {
            return i;
        }
        let mut ids = Vec::new();
        for (slot, h) in d.all() {
            let k = if slot == Slot::H2 { DivKind::Two } else { DivKind::Four };
            ids.push(self.intern_div(h, k));
        }
        self.dens.push(ids);
        self.den_index.insert(d.clone(), self.dens.len() - 1);
        self.dens.len() - 1
    }

    /// Frequencies omega^(2)_a and omega^(2)_a + omega^(4)_a for a = 0..=N.
    fn frequencies<S: Scalar>(&self, z: &[S]) -> (Vec<S>, Vec<S>) {
        let n = self.n as usize;
        let act: Vec<S> = (0..=n)
            .map(|a| if a >= 1 && a <= z.len() { z[a - 1] * z[a - 1].conj() } else { S::zero() })
            .collect();
        let quarter = S::from_f64(0.25);
        let w2: Vec<S> = act.iter().enumerate().map(|(a, &i)| if a == 0 { S::zero() } else { i * quarter }).collect();
        let w24: Vec<S> = (0..=n)
            .map(|a| {
                let mut s = w2[a];
                for &(d, e, c) in &self.w4[a] {
                    s += S::from_f64(c) * act[d as usize] * act[e as usize];
                }
                s
            })
            .collect();
        (w2, w24)
    }

    pub fn divisor_values<S: Scalar>(&self, z: &[S]) -> Result<Vec<S>> {
        let (w2, w24) = self.frequencies(z);
        let norm_sq: f64 = z.iter().map(|x| x.value().norm_sqr()).sum();
        let floor = (DIVISOR_REL_FLOOR * norm_sq).max(DIVISOR_ABS_FLOOR);
        let two = S::from_f64(2.0);
        let mut out = Vec::with_capacity(self.divisors.len());
        for (h, k) in &self.divisors {
            let w = if *k == DivKind::Two { &w2 } else { &w24 };
            let mut s = S::zero();
            for e in h.entries() {
                let f = w[e.a as usize];
                match e.delta {
                    1 => s += f,
                    -1 => s = s - f,
                    _ => {}
                }
            }
            let b = h.delta() as usize;
            let v = two * (s - w[b]);
            if v.value().norm() < floor {
                return Err(Error::NearZeroDivisor { index: h.to_string(), value: v.value().norm(), floor });
            }
            out.push(v);
        }
        Ok(out)
    }

    pub fn evaluate<S: Scalar>(&self, z: &[S]) -> Result<Vec<S>> {
        let dv = self.divisor_values(z)?;
        let den_vals: Vec<S> = self.dens.iter().map(|ids| ids.iter().fold(S::one(), |acc, &i| acc * dv[i])).collect();
        let zc: Vec<S> = z.iter().map(|x| x.conj()).collect();
        let mut out = vec![S::zero(); z.len()];
        for (a, m, den, c) in &self.terms {
            let i = *a as usize - 1;
            if i >= z.len() {
                continue;
            }
            out[i] += m.eval(z, &zc).scale(*c) / den_vals[*den];
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Evaluates a scalar rational function.
pub fn evaluate_scalar<S: Scalar>(f: &RScalar, n: u32, z: &[S]) -> Result<S> {
    let mut c = Compiled::new(n);
    let mut items = Vec::new();
    for ((m, d), coef) in f {
        let den = c.intern_den(d);
        items.push((m, den, to_c64(coef)));
    }
    let dv = c.divisor_values(z)?;
    let zc: Vec<S> = z.iter().map(|x| x.conj()).collect();
    let mut s = S::zero();
    for (m, den, coef) in items {
        let dval = c.dens[den].iter().fold(S::one(), |acc, &i| acc * dv[i]);
        s += m.eval(z, &zc).scale(coef) / dval;
    }
    Ok(s)
}

/// DI_a[X](z) = conj(z_a) X^{(a)}(z) + z_a conj(X^{(a)}(z)), numerically.
pub fn di_numeric(x: &[Complex64], z: &[Complex64], a: u32) -> Complex64 {
    let i = a as usize - 1;
    z[i].conj() * x[i] + z[i] * x[i].conj()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nf::exact::{imag, q, qi, real};
    use crate::nf::mono::Kind;
    use crate::nf::poly::bracket;
    use crate::space::WeightSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_z(rng: &mut ChaCha8Rng, m: usize, scale: f64) -> Vec<Complex64> {
        (0..m).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale).collect()
    }

    fn sample_field(n: u32) -> RationalVF {
        let mut x = RationalVF::new(Parity::Reversible, n);
        let j = IndexVector::from_pairs(&[(1, 2), (0, 1), (-1, 3), (1, 1)]);
        let m = Mono::from_kind_j(1, Kind::Diag, &j);
        let h = IndexVector::from_pairs(&[(1, 2), (-1, 3), (1, 1)]);
        let (d, _) = push_divisor(&Denominator::none(), Slot::H2, &h);
        x.add(1, m.clone(), d.clone(), &imag(qi(2)));
        let (d4, _) = push_divisor(&Denominator::none(), Slot::K, &h);
        x.add(1, m, d4, &imag(q(1, 3)));
        x
    }

    #[test]
    fn divisor_free_bracket_matches_poly() {
        let mut p = PolyVF::new(Parity::Reversible);
        p.add_term(1, Kind::Anti, &IndexVector::from_pairs(&[(1, 2)]), &imag(qi(1)));
        p.add_term(2, Kind::Diag, &IndexVector::from_pairs(&[(0, 1)]), &imag(q(1, 2)));
        let mut c = PolyVF::new(Parity::AntiReversible);
        c.add_term(2, Kind::Anti, &IndexVector::from_pairs(&[(-1, 1)]), &real(q(1, 5)));
        let pb = bracket(&p, &c);
        let rb = rational_bracket(&RationalVF::from_poly(&p, 3), &RationalVF::from_poly(&c, 3)).unwrap();
        assert_eq!(rb.len(), pb.len());
        assert_eq!(rb.polynomial_part(), pb.with_cutoff(3));
    }

    #[test]
    fn bracket_with_zero() {
        let x = sample_field(3);
        let z = RationalVF::new(Parity::AntiReversible, 3);
        assert!(rational_bracket(&x, &z).unwrap().is_zero());
    }

    #[test]
    fn numeric_bracket_agrees_with_symbolic() {
        let n = 3;
        let x = sample_field(n);
        let mut y = RationalVF::new(Parity::AntiReversible, n);
        y.add(2, Mono::from_kind_j(2, Kind::Anti, &IndexVector::from_pairs(&[(1, 1), (1, 1)])), Denominator::none(), &real(qi(1)));
        let h = IndexVector::from_pairs(&[(1, 1), (1, 1)]);
        let (d, _) = push_divisor(&Denominator::none(), Slot::H4, &h);
        y.add(2, Mono::from_kind_j(2, Kind::Anti, &IndexVector::from_pairs(&[(1, 1), (1, 1), (0, 3)])), d, &real(q(-2, 7)));
        let b = rational_bracket(&x, &y).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let z = rand_z(&mut rng, n as usize, 0.3);
            let xz = x.evaluate(&z).unwrap();
            let yz = y.evaluate(&z).unwrap();
            let dx = x.evaluate(&super::super::scalar::dual_point(&z, &yz)).unwrap();
            let dy = y.evaluate(&super::super::scalar::dual_point(&z, &xz)).unwrap();
            let bz = b.evaluate(&z).unwrap();
            for i in 0..n as usize {
                let expect = dx[i].d - dy[i].d;
                assert!((bz[i] - expect).norm() <= 1e-9 * (1.0 + expect.norm()), "{} vs {}", bz[i], expect);
            }
        }
    }

    #[test]
    fn near_zero_divisor_is_refused() {
        let x = sample_field(3);
        // all actions equal to zero except mode 1 and 2 chosen to cancel Omega2
        let z = vec![Complex64::new(0.0, 0.0); 3];
        assert!(x.evaluate(&z).is_err());
    }

    #[test]
    fn normal_form_symmetry() {
        let mut q7 = RationalVF::new(Parity::Reversible, 3);
        let j = IndexVector::from_pairs(&[(1, 2), (-1, 1), (-1, 1)]);
        let (d, _) = push_divisor(&Denominator::none(), Slot::H2, &j);
        q7.add(1, Mono::from_kind_j(1, Kind::Diag, &j), d.clone(), &imag(qi(1)));
        assert!(!q7.is_rational_normal_form());
        q7.add(1, Mono::from_kind_j(1, Kind::Diag, &j.conj()), d, &imag(qi(1)));
        assert!(q7.is_rational_normal_form());
        let w = WeightSpec::sobolev(3.0);
        assert!(q7.check_structure(&w).is_ok());
    }

    #[test]
    fn di_of_symmetric_field_vanishes() {
        let mut q7 = RationalVF::new(Parity::Reversible, 3);
        let j = IndexVector::from_pairs(&[(1, 2), (-1, 1), (-1, 1)]);
        let (d, _) = push_divisor(&Denominator::none(), Slot::H2, &j);
        q7.add(1, Mono::from_kind_j(1, Kind::Diag, &j), d.clone(), &imag(q(3, 5)));
        q7.add(1, Mono::from_kind_j(1, Kind::Diag, &j.conj()), d, &imag(q(3, 5)));
        assert!(di_symbolic(&q7, 1).is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let z = rand_z(&mut rng, 3, 0.5);
        let v = q7.evaluate(&z).unwrap();
        assert!(di_numeric(&v, &z, 1).norm() < 1e-14);
    }
}

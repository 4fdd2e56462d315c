//! Weighted sequence spaces, mode indexing and monomial indices.

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weight used in the phase-space norm: `a^s` (Sobolev) or `exp(rho a^theta)` (Gevrey).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WeightSpec {
    Sobolev { s: f64 },
    Gevrey { rho: f64, theta: f64 },
}

impl WeightSpec {
    pub fn sobolev(s: f64) -> Self {
        WeightSpec::Sobolev { s }
    }

    pub fn gevrey(rho: f64, theta: f64) -> Self {
        WeightSpec::Gevrey { rho, theta }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            WeightSpec::Sobolev { s } if s >= 0.0 && s.is_finite() => Ok(()),
            WeightSpec::Sobolev { s } => Err(Error::Domain(format!("Sobolev index s = {s} must be >= 0"))),
            WeightSpec::Gevrey { rho, theta } => {
                if !(rho > 0.0 && rho.is_finite()) {
                    return Err(Error::Domain(format!("Gevrey rho = {rho} must be > 0")));
                }
                if !(theta > 0.0 && theta <= 1.0) {
                    return Err(Error::Domain(format!("Gevrey theta = {theta} must lie in (0, 1]")));
                }
                Ok(())
            }
        }
    }

    /// w(a); equals 1 at a = 0 by convention.
    pub fn weight(&self, a: u32) -> f64 {
        if a == 0 {
            return 1.0;
        }
        let a = a as f64;
        match *self {
            WeightSpec::Sobolev { s } => a.powf(s),
            WeightSpec::Gevrey { rho, theta } => (rho * a.powf(theta)).exp(),
        }
    }

    /// w(a)^2, computed without squaring an overflowed weight.
    pub fn weight_sq(&self, a: u32) -> f64 {
        if a == 0 {
            return 1.0;
        }
        let a = a as f64;
        match *self {
            WeightSpec::Sobolev { s } => a.powf(2.0 * s),
            WeightSpec::Gevrey { rho, theta } => (2.0 * rho * a.powf(theta)).exp(),
        }
    }

    /// The small-scale factor `kappa^{-2s}` or `exp(-2 rho kappa^theta)` in the divisor thresholds.
    pub fn kappa_factor(&self, kappa: u32) -> f64 {
        1.0 / self.weight_sq(kappa)
    }

    pub fn is_gevrey(&self) -> bool {
        matches!(self, WeightSpec::Gevrey { .. })
    }
}

/// A complex sequence on modes `1..=M`; modes beyond the truncation read as zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexSeq {
    values: Vec<Complex64>,
}

impl ComplexSeq {
    pub fn zeros(m: usize) -> Self {
        ComplexSeq { values: vec![Complex64::new(0.0, 0.0); m] }
    }

    /// Builds a sequence from `values[a-1] = z_a`.
    pub fn from_vec(values: Vec<Complex64>) -> Self {
        ComplexSeq { values }
    }

    pub fn from_pairs(m: usize, pairs: &[(u32, Complex64)]) -> Self {
        let mut z = Self::zeros(m);
        for &(a, c) in pairs {
            z.set(a, c);
        }
        z
    }

    pub fn truncation(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, a: u32) -> Complex64 {
        if a == 0 {
            return Complex64::new(0.0, 0.0);
        }
        self.values.get(a as usize - 1).copied().unwrap_or_default()
    }

    /// Sets z_a. Panics if `a` is outside `1..=M`.
    pub fn set(&mut self, a: u32, c: Complex64) {
        assert!(a >= 1 && (a as usize) <= self.values.len(), "mode {a} outside truncation");
        self.values[a as usize - 1] = c;
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, Complex64)> + '_ {
        self.values.iter().enumerate().map(|(i, &c)| (i as u32 + 1, c))
    }

    /// I_a = |z_a|^2 for a = 1..=M.
    pub fn actions(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        ComplexSeq { values: self.values.iter().map(|&x| x * c).collect() }
    }

    pub fn conj(&self) -> Self {
        ComplexSeq { values: self.values.iter().map(|x| x.conj()).collect() }
    }

    pub fn norm(&self, w: &WeightSpec) -> f64 {
        weighted_norm(self, w)
    }

    pub fn max_abs_diff(&self, other: &ComplexSeq) -> f64 {
        let m = self.truncation().max(other.truncation()) as u32;
        (1..=m).map(|a| (self.get(a) - other.get(a)).norm()).fold(0.0, f64::max)
    }
}

/// (sum_a w(a)^2 |z_a|^2)^{1/2}.
pub fn weighted_norm(z: &ComplexSeq, w: &WeightSpec) -> f64 {
    z.iter().map(|(a, c)| w.weight_sq(a) * c.norm_sqr()).sum::<f64>().sqrt()
}

/// One factor of a monomial: z_a^2 (delta = 1), conj(z_a)^2 (delta = -1) or I_a (delta = 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MonomialIndex {
    pub delta: i8,
    pub a: u32,
}

impl MonomialIndex {
    pub fn new(delta: i8, a: u32) -> Self {
        debug_assert!((-1..=1).contains(&delta) && a >= 1);
        MonomialIndex { delta, a }
    }

    pub fn conj(self) -> Self {
        MonomialIndex { delta: -self.delta, a: self.a }
    }

    fn delta_rank(self) -> u8 {
        match self.delta {
            0 => 0,
            -1 => 1,
            _ => 2,
        }
    }
}

impl Ord for MonomialIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.a, self.delta_rank()).cmp(&(other.a, other.delta_rank()))
    }
}

impl PartialOrd for MonomialIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MonomialIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.delta, self.a)
    }
}

/// zeta_j evaluated at z.
pub fn zeta_value(j: MonomialIndex, z: &ComplexSeq) -> Complex64 {
    let za = z.get(j.a);
    match j.delta {
        1 => za * za,
        -1 => za.conj() * za.conj(),
        _ => Complex64::new(za.norm_sqr(), 0.0),
    }
}

/// A multiset of monomial indices kept in canonical order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexVector(Vec<MonomialIndex>);

impl IndexVector {
    pub fn new(mut entries: Vec<MonomialIndex>) -> Self {
        entries.sort();
        IndexVector(entries)
    }

    pub fn empty() -> Self {
        IndexVector(Vec::new())
    }

    pub fn from_pairs(pairs: &[(i8, u32)]) -> Self {
        Self::new(pairs.iter().map(|&(d, a)| MonomialIndex::new(d, a)).collect())
    }

    pub fn entries(&self) -> &[MonomialIndex] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Delta_j = sum of delta_k a_k.
    pub fn delta(&self) -> i64 {
        self.0.iter().map(|j| j.delta as i64 * j.a as i64).sum()
    }

    /// Mode indices in decreasing order (j_1^* >= j_2^* >= ...).
    pub fn decreasing_modes(&self) -> Vec<u32> {
        let mut m: Vec<u32> = self.0.iter().map(|j| j.a).collect();
        m.sort_unstable_by(|x, y| y.cmp(x));
        m
    }

    pub fn max_mode(&self) -> Option<u32> {
        self.0.iter().map(|j| j.a).max()
    }

    pub fn mu_min(&self) -> Option<u32> {
        self.0.iter().map(|j| j.a).min()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.0.iter().map(|j| j.conj()).collect())
    }

    pub fn concat(&self, other: &IndexVector) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Self::new(v)
    }

    pub fn with(&self, j: MonomialIndex) -> Self {
        let mut v = self.0.clone();
        v.push(j);
        Self::new(v)
    }

    /// Removes one occurrence of `j`; returns None when absent.
    pub fn without(&self, j: MonomialIndex) -> Option<Self> {
        let pos = self.0.iter().position(|x| *x == j)?;
        let mut v = self.0.clone();
        v.remove(pos);
        Some(IndexVector(v))
    }

    pub fn count(&self, j: MonomialIndex) -> usize {
        self.0.iter().filter(|x| **x == j).count()
    }

    /// Number of distinct orderings of the multiset.
    pub fn permutations(&self) -> u128 {
        let mut n: u128 = 1;
        let mut run = 0u128;
        for (i, x) in self.0.iter().enumerate() {
            run = if i > 0 && self.0[i - 1] == *x { run + 1 } else { 1 };
            n = n * (i as u128 + 1) / run;
        }
        n
    }

    /// zeta_j(z) as a product.
    pub fn value(&self, z: &ComplexSeq) -> Complex64 {
        self.0.iter().fold(Complex64::new(1.0, 0.0), |acc, &j| acc * zeta_value(j, z))
    }

    /// True when every factor is an action or pairs with its conjugate.
    pub fn is_integrable(&self) -> bool {
        let mut rest: Vec<MonomialIndex> = self.0.iter().copied().filter(|j| j.delta != 0).collect();
        while let Some(j) = rest.pop() {
            match rest.iter().position(|x| *x == j.conj()) {
                Some(p) => {
                    rest.remove(p);
                }
                None => return false,
            }
        }
        true
    }
}

impl fmt::Display for IndexVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, j) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{j}")?;
        }
        write!(f, ")")
    }
}

/// Sorts a raw index list into canonical (a, delta) order with delta ranked 0 < -1 < 1.
pub fn canonicalize(v: &[MonomialIndex]) -> IndexVector {
    IndexVector::new(v.to_vec())
}

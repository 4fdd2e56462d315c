//! JSON term lists for polynomial and rational fields.
//!
//! Each term is `{a, kind, j, h, k, n, coefficient}`: `j`, `h`, `k` hold
//! `[delta, mode]` pairs, `h` lists the n Omega^(2) divisors before the
//! Omega^(4) ones, and the coefficient is the monomial coefficient (all
//! orderings of j folded in) as a pair of exact fractions.

use super::exact::FractionPair;
use super::mono::{Kind, Mono};
use super::poly::{Parity, PolyVF};
use super::rational::{Denominator, RationalVF};
use crate::error::{Error, Result};
use crate::space::{IndexVector, MonomialIndex};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonTerm {
    pub a: u32,
    pub kind: Kind,
    pub j: Vec<[i64; 2]>,
    pub h: Vec<Vec<[i64; 2]>>,
    pub k: Vec<Vec<[i64; 2]>>,
    pub n: usize,
    pub coefficient: FractionPair,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonField {
    pub name: String,
    pub parity: Parity,
    #[serde(rename = "N")]
    pub cutoff: u32,
    pub terms: Vec<JsonTerm>,
}

fn pairs(j: &IndexVector) -> Vec<[i64; 2]> {
    j.entries().iter().map(|e| [e.delta as i64, e.a as i64]).collect()
}

fn index(p: &[[i64; 2]]) -> Result<IndexVector> {
    let mut v = Vec::with_capacity(p.len());
    for &[d, a] in p {
        if !(-1..=1).contains(&d) || a < 1 {
            return Err(Error::Domain(format!("bad index entry [{d}, {a}]")));
        }
        v.push(MonomialIndex::new(d as i8, a as u32));
    }
    Ok(IndexVector::new(v))
}

fn term(a: u32, m: &Mono, d: &Denominator, c: &super::exact::CQ) -> Result<JsonTerm> {
    let (kind, j) = m
        .canonical(a)
        .ok_or_else(|| Error::Structure(format!("{m} has no index form in component {a}")))?;
    Ok(JsonTerm {
        a,
        kind,
        j: pairs(&j),
        h: d.h().map(pairs).collect(),
        k: d.k.iter().map(pairs).collect(),
        n: d.n(),
        coefficient: FractionPair::from_cq(c),
    })
}

pub fn poly_to_json(name: &str, p: &PolyVF, n: u32) -> Result<JsonField> {
    let none = Denominator::none();
    let terms = p.monomials().map(|(a, m, c)| term(a, m, &none, c)).collect::<Result<_>>()?;
    Ok(JsonField { name: name.into(), parity: p.parity, cutoff: n, terms })
}

pub fn rational_to_json(name: &str, r: &RationalVF) -> Result<JsonField> {
    let terms = r.terms().map(|((a, m, d), c)| term(*a, m, d, c)).collect::<Result<_>>()?;
    Ok(JsonField { name: name.into(), parity: r.parity, cutoff: r.n, terms })
}

fn parse_term(t: &JsonTerm) -> Result<(u32, Mono, Denominator, super::exact::CQ)> {
    let j = index(&t.j)?;
    let m = Mono::from_kind_j(t.a, t.kind, &j);
    if t.n > t.h.len() {
        return Err(Error::Domain(format!("n = {} exceeds #h = {}", t.n, t.h.len())));
    }
    let hs = t.h.iter().map(|h| index(h)).collect::<Result<Vec<_>>>()?;
    let mut den = Denominator::none();
    den.h2 = hs[..t.n].to_vec();
    den.h4 = hs[t.n..].to_vec();
    den.k = t.k.iter().map(|h| index(h)).collect::<Result<_>>()?;
    for v in [&mut den.h2, &mut den.h4, &mut den.k] {
        v.sort();
    }
    let c = t
        .coefficient
        .to_cq()
        .ok_or_else(|| Error::Domain(format!("bad coefficient {:?}", t.coefficient)))?;
    Ok((t.a, m, den, c))
}

pub fn rational_from_json(f: &JsonField) -> Result<RationalVF> {
    let mut r = RationalVF::new(f.parity, f.cutoff);
    for t in &f.terms {
        let (a, m, d, c) = parse_term(t)?;
        r.add(a, m, d, &c);
    }
    Ok(r)
}

pub fn poly_from_json(f: &JsonField) -> Result<PolyVF> {
    let mut p = PolyVF::new(f.parity).with_cutoff(f.cutoff);
    for t in &f.terms {
        let (a, m, d, c) = parse_term(t)?;
        if !d.is_empty() {
            return Err(Error::Structure("polynomial field with a divisor".into()));
        }
        p.add_monomial(a, m, &c);
    }
    Ok(p)
}

/// K3, K5, Z5, chi3, S and M at cutoff N, in that order.
pub fn golden_fields(n: u32) -> Result<Vec<JsonField>> {
    let nf = super::resonant::resonant_normal_form(2, n)?;
    let (k3, k5) = (&nf.k[0], &nf.k[1]);
    let (z5, k5_anti) = super::resonant::split_integrable(k5);
    let quintic = super::solvers::quintic_rational_solve(&k5_anti, n)?;
    Ok(vec![
        poly_to_json("K3", k3, n)?,
        poly_to_json("K5", k5, n)?,
        poly_to_json("Z5", &z5, n)?,
        poly_to_json("chi3", &super::resonant::chi3_explicit(n), n)?,
        rational_to_json("S", &quintic.s)?,
        rational_to_json("M", &quintic.m)?,
    ])
}

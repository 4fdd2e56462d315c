//! Homological equations with the action-dependent frequencies of Z_3 and
//! Z_3 + Z_5 as the linear part.

use super::exact::{czero, i_unit, imag, q, qi, scale_q, CQ};
use super::mono::{Kind, Mono};
use super::poly::{Parity, PolyVF};
use super::rational::{
    control_condition, di_symbolic, push_divisor, rational_bracket, RKey, RScalar, RationalVF, Slot,
};
use super::resonant::{resonant_normal_form, split_integrable};
use crate::divisors::{irr_unchecked, omega4_monomials};
use crate::error::{Error, Result};
use crate::space::WeightSpec;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Irr(j) of a term, relative to Delta = 0 (diag) or Delta = a (anti). The
/// diag form z_a zeta_j is used whenever z_a divides the monomial, so that a
/// term and its conjugate partner get conjugate divisor indices.
pub fn term_irr(a: u32, m: &Mono) -> Result<crate::space::IndexVector> {
    let kind = if m.exps(a).0 > 0 { Kind::Diag } else { Kind::Anti };
    let j = m
        .index_as(a, kind)
        .ok_or_else(|| Error::Structure(format!("{m} is not of the form z_a zeta_j in component {a}")))?;
    let target = match kind {
        Kind::Diag => 0,
        Kind::Anti => a as i64,
    };
    if j.delta() != target {
        return Err(Error::Structure(format!("{m} is not resonant in component {a}")));
    }
    Ok(irr_unchecked(&j, target))
}

/// chi = i Q / Omega_{Irr j} term by term, with Irr(j) appended to `slot`.
/// Integrable terms are returned separately.
fn divide(q: &RationalVF, slot: Slot) -> Result<(RationalVF, RationalVF)> {
    q.check_parity()?;
    let chi_parity = match q.parity {
        Parity::Reversible => Parity::AntiReversible,
        Parity::AntiReversible => Parity::Reversible,
        Parity::None => Parity::None,
    };
    let mut chi = RationalVF::new(chi_parity, q.n);
    let mut z_int = RationalVF::new(q.parity, q.n);
    for ((a, m, d), c) in q.terms() {
        let h = term_irr(*a, m)?;
        if h.is_empty() {
            z_int.add(*a, m.clone(), d.clone(), c);
            continue;
        }
        let (den, flip) = push_divisor(d, slot, &h);
        let mut cc = &i_unit() * c;
        if flip {
            cc = -cc;
        }
        chi.add(*a, m.clone(), den, &cc);
    }
    Ok((chi, z_int))
}

/// z_a * I_e (if any) * f as a term list in the z_a component, scaled by s.
fn times_za(out: &mut HashMap<RKey, CQ>, a: u32, extra: &Mono, f: &RScalar, s: &CQ) {
    let za = Mono::var(a, false).mul(extra);
    for ((m, d), c) in f {
        *out.entry((a, za.mul(m), d.clone())).or_insert_with(czero) += c * s;
    }
}

fn build(parity: Parity, n: u32, terms: HashMap<RKey, CQ>) -> RationalVF {
    let mut out = RationalVF::new(parity, n);
    for ((a, m, d), c) in terms {
        out.add(a, m, d, &c);
    }
    out
}

fn action(e: u32) -> Mono {
    Mono::var(e, false).mul(&Mono::var(e, true))
}

/// -(i/4) z_a DI_a[chi] for a <= N.
fn remainder_z3(chi: &RationalVF, di: &[RScalar]) -> RationalVF {
    let mut acc = HashMap::new();
    let s = imag(q(-1, 4));
    for a in 1..=chi.n {
        times_za(&mut acc, a, &Mono::one(), &di[a as usize], &s);
    }
    build(Parity::Reversible.bracket(chi.parity).bracket(Parity::Reversible), chi.n, acc)
}

fn di_all(chi: &RationalVF) -> Vec<RScalar> {
    (0..=chi.n).map(|b| if b == 0 { RScalar::new() } else { di_symbolic(chi, b) }).collect()
}

/// Solution of [Z_3, chi] + Q = Z_int + R with Omega^(2) divisors.
#[derive(Debug, Clone)]
pub struct Z3Solution {
    pub chi: RationalVF,
    pub z_int: RationalVF,
    /// -(i/4) z_a DI_a[chi], a rational normal form
    pub remainder: RationalVF,
}

pub fn solve_z3(q: &RationalVF) -> Result<Z3Solution> {
    let (chi, z_int) = divide(q, Slot::H2)?;
    let di = di_all(&chi);
    let mut remainder = remainder_z3(&chi, &di);
    remainder.parity = q.parity;
    Ok(Z3Solution { chi, z_int, remainder })
}

/// Coefficient-norm comparisons reported by the Z_3 + Z_5 solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverBounds {
    pub q: f64,
    pub chi: f64,
    pub znf_l: f64,
    pub znf_lm1: f64,
}

impl SolverBounds {
    /// ||chi|| <= ||Q||, ||Z_l|| <= 2 ||Q||, ||Z_{l-1}|| <= ||Q|| / 2.
    pub fn hold(&self) -> bool {
        let t = 1.0 + 1e-12;
        self.chi <= self.q * t && self.znf_l <= 2.0 * self.q * t && self.znf_lm1 <= 0.5 * self.q * t
    }
}

/// Solution of [Z_3 + Z_5, chi] + Q = Z_int + Z_l + Z_{l-1}.
#[derive(Debug, Clone)]
pub struct Z3Z5Solution {
    pub chi: RationalVF,
    pub z_int: RationalVF,
    /// -i z_a sum_d d omega4_a / d I_d DI_d[chi]
    pub znf_l: RationalVF,
    /// -(i/4) z_a DI_a[chi]
    pub znf_lm1: RationalVF,
    pub bounds: SolverBounds,
}

pub fn solve_homological_z3z5(q: &RationalVF) -> Result<Z3Z5Solution> {
    let n = q.n;
    let (chi, z_int) = divide(q, Slot::K)?;
    let di = di_all(&chi);
    let mut znf_lm1 = remainder_z3(&chi, &di);
    znf_lm1.parity = q.parity;
    let mut acc = HashMap::new();
    for a in 1..=n {
        for (d, e, c) in omega4_monomials(a, n) {
            let s = imag(-c);
            if d == e {
                times_za(&mut acc, a, &action(d), &di[d as usize], &scale_q(&s, &qi(2)));
            } else {
                times_za(&mut acc, a, &action(e), &di[d as usize], &s);
                times_za(&mut acc, a, &action(d), &di[e as usize], &s);
            }
        }
    }
    let znf_l = build(q.parity, n, acc);
    let bounds = SolverBounds { q: q.norm(), chi: chi.norm(), znf_l: znf_l.norm(), znf_lm1: znf_lm1.norm() };
    Ok(Z3Z5Solution { chi, z_int, znf_l, znf_lm1, bounds })
}

/// S and M with [Z_3, S + M] + K = 0 for the non-integrable quintic part K.
#[derive(Debug, Clone)]
pub struct QuinticSolution {
    pub k: RationalVF,
    pub s: RationalVF,
    pub m: RationalVF,
    /// -(i/4) z_a DI_a[S], removed by M
    pub r_s: RationalVF,
}

pub fn quintic_rational_solve(k5_nonint: &PolyVF, n: u32) -> Result<QuinticSolution> {
    let k = RationalVF::from_poly(&k5_nonint.restrict_modes(n), n);
    let first = solve_z3(&k)?;
    if !first.z_int.is_zero() {
        return Err(Error::Structure("non-integrable quintic input has integrable terms".into()));
    }
    let second = solve_z3(&first.remainder)?;
    if !second.z_int.is_zero() || !second.remainder.is_zero() {
        return Err(Error::Structure("second quintic step left a remainder".into()));
    }
    Ok(QuinticSolution { k, s: first.chi, m: second.chi, r_s: first.remainder })
}

/// Requires k = empty and the strong control condition on every term.
pub fn check_septic_input(q: &RationalVF, weight: &WeightSpec) -> Result<()> {
    for ((a, m, d), _) in q.terms() {
        if d.k_count() > 0 || !d.h4.is_empty() {
            return Err(Error::Structure(format!("septic input term in component {a} carries Omega^(4) divisors")));
        }
        if !control_condition(m, d, weight, true) {
            return Err(Error::Structure(format!("strong control condition fails for {m} / {d:?} in component {a}")));
        }
    }
    Ok(())
}

/// Everything produced on the way from the Taylor fields to the order-7 stage.
#[derive(Debug, Clone)]
pub struct SepticStage {
    pub n: u32,
    pub k3: PolyVF,
    pub k5: PolyVF,
    pub z5: PolyVF,
    pub k7: PolyVF,
    pub quintic: QuinticSolution,
    /// order-3 input K_7 + [Z_5 + K/2, S + M]
    pub q7: RationalVF,
    pub solution: Z3Solution,
}

/// Runs the resonant normal form to order 7, removes the quintic
/// non-integrable part with S + M, and solves the Z_3 equation on the order-7
/// field that results.
pub fn septic_stage(n: u32, weight: &WeightSpec) -> Result<SepticStage> {
    let nf = resonant_normal_form(3, n)?;
    let (k3, k5, k7) = (nf.k[0].clone(), nf.k[1].clone(), nf.k[2].clone());
    let (z5, k5_anti) = split_integrable(&k5);
    let quintic = quintic_rational_solve(&k5_anti, n)?;
    let gen = quintic.s.plus(&quintic.m);
    let x = RationalVF::from_poly(&z5, n).plus(&RationalVF::from_poly(&k5_anti, n).scale_q(&q(1, 2)));
    let mut q7 = rational_bracket(&x, &gen)?.plus(&RationalVF::from_poly(&k7, n));
    q7.parity = Parity::Reversible;
    q7.check_parity()?;
    q7.check_structure(weight)?;
    check_septic_input(&q7, weight)?;
    let solution = solve_z3(&q7)?;
    Ok(SepticStage { n, k3, k5, z5, k7, quintic, q7, solution })
}

/// Count of terms per (h, k) size, for reporting.
pub fn divisor_profile(v: &RationalVF) -> Vec<((usize, usize, usize), usize)> {
    let mut m: HashMap<(usize, usize, usize), usize> = HashMap::new();
    for ((_, _, d), _) in v.terms() {
        *m.entry((d.n(), d.h_count(), d.k_count())).or_default() += 1;
    }
    let mut out: Vec<_> = m.into_iter().collect();
    out.sort();
    out
}

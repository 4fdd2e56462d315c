//! Structural invariants over randomized small fields: parity, control
//! condition, order bookkeeping and the polynomial commutator bound. Shared
//! by the core property tests and the acceptance suite.

use kirchhoff_core::nf::exact::{imag, is_imag, is_real, q, real, CQ};
use kirchhoff_core::nf::poly::bracket;
use kirchhoff_core::nf::rational::{control_condition, rational_bracket, term_info, RationalVF};
use kirchhoff_core::nf::resonant::{k3_expected, k5_anti_expected, split_integrable, z5_expected};
use kirchhoff_core::nf::solvers::{quintic_rational_solve, solve_homological_z3z5, solve_z3};
use kirchhoff_core::nf::{Kind, Parity, PolyVF};
use kirchhoff_core::{IndexVector, MonomialIndex, WeightSpec};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRng, TestRunner};
use std::sync::OnceLock;

pub const N: u32 = 4;

/// Homogeneous rational fields of known order and parity to draw terms from.
pub struct Pools {
    pub rev: Vec<(RationalVF, i64)>,
    pub anti: Vec<(RationalVF, i64)>,
}

pub fn pools() -> &'static Pools {
    static P: OnceLock<Pools> = OnceLock::new();
    P.get_or_init(|| {
        let k5_anti = k5_anti_expected(N);
        let quintic = quintic_rational_solve(&k5_anti, N).unwrap();
        let (_, nonint) = split_integrable(&k5_anti);
        let second = solve_z3(&quintic.r_s).unwrap();
        let rev = vec![
            (RationalVF::from_poly(&k3_expected(N), N), 1),
            (RationalVF::from_poly(&z5_expected(N), N), 2),
            (RationalVF::from_poly(&nonint, N), 2),
            (quintic.r_s.clone(), 2),
        ];
        let anti = vec![
            (quintic.s.clone(), 1),
            (quintic.m.clone(), 1),
            (second.chi.clone(), 1),
        ];
        Pools { rev, anti }
    })
}

/// Up to three terms of `src`, each rescaled by a nonzero rational.
pub type Pick = (usize, i64, i64);
pub type PolyTerm = (u32, bool, Vec<(i8, u32)>, i64, i64);

fn pick(src: &RationalVF, picks: &[Pick]) -> RationalVF {
    let all: Vec<_> = src.terms().map(|(k, c)| (k.clone(), c.clone())).collect();
    let mut out = RationalVF::new(src.parity, src.n);
    for &(i, p, d) in picks {
        let ((a, m, den), c) = &all[i % all.len()];
        out.add(*a, m.clone(), den.clone(), &(c * real(q(p, d))));
    }
    out
}

pub fn picks() -> impl Strategy<Value = Vec<Pick>> {
    prop::collection::vec((0usize..10_000, prop_oneof![-5i64..=-1, 1i64..=5], 1i64..=4), 1..=3)
}

fn check_terms(v: &RationalVF, weight: &WeightSpec, order: i64, want_imag: bool) -> std::result::Result<(), TestCaseError> {
    for ((a, m, d), c) in v.terms() {
        prop_assert!(if want_imag { is_imag(c) } else { is_real(c) }, "parity broken on {m}");
        let l = term_info(*a, m, d, v.n).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(l, order, "order of {} in component {}", m, a);
        prop_assert!(control_condition(m, d, weight, false), "control condition fails for {}", m);
    }
    Ok(())
}

fn random_index(len: usize, seed: &[(i8, u32)]) -> IndexVector {
    IndexVector::new(seed.iter().take(len).map(|&(d, a)| MonomialIndex::new(d, a)).collect())
}

fn random_poly(parity: Parity, l: usize, terms: &[PolyTerm]) -> PolyVF {
    let mut x = PolyVF::new(parity).with_cutoff(3);
    for (a, diag, j, p, d) in terms {
        let kind = if *diag { Kind::Diag } else { Kind::Anti };
        let c: CQ = match parity {
            Parity::Reversible => imag(q(*p, *d)),
            _ => real(q(*p, *d)),
        };
        x.add_term(*a, kind, &random_index(l, j), &c);
    }
    x
}

pub fn poly_terms() -> impl Strategy<Value = Vec<PolyTerm>> {
    prop::collection::vec(
        (1u32..=3, any::<bool>(), prop::collection::vec((-1i8..=1, 1u32..=3), 3), prop_oneof![-6i64..=-1, 1i64..=6], 1i64..=6),
        1..=4,
    )
}

type Case = std::result::Result<(), TestCaseError>;

pub fn commutator_case(l1: usize, l2: usize, xt: &[PolyTerm], yt: &[PolyTerm]) -> Case {
    let x = random_poly(Parity::Reversible, l1, xt);
    let y = random_poly(Parity::AntiReversible, l2, yt);
    let b = bracket(&x, &y);
    let bound = 6.0 * (l1 + l2 + 1) as f64 * x.norm() * y.norm();
    prop_assert!(b.norm() <= bound * (1.0 + 1e-12), "{} > {}", b.norm(), bound);
    for (_, m, c) in b.monomials() {
        prop_assert!(is_imag(c), "coefficient of {} is not imaginary", m);
    }
    let orders = b.orders();
    prop_assert!(orders.is_empty() || orders.into_iter().collect::<Vec<_>>() == vec![(l1 + l2) as u32]);
    // anti with anti gives anti
    let yy = bracket(&y, &y.scale_q(&q(2, 1)));
    prop_assert!(yy.monomials().all(|(_, _, c)| is_real(c)));
    Ok(())
}

pub fn rational_case(xi: usize, yi: usize, xp: &[Pick], yp: &[Pick], gevrey: bool) -> Case {
    let p = pools();
    let (xs, lx) = &p.rev[xi];
    let (ys, ly) = &p.anti[yi];
    let x = pick(xs, xp);
    let y = pick(ys, yp);
    let weight = if gevrey { WeightSpec::gevrey(0.5, 0.5) } else { WeightSpec::sobolev(3.0) };
    check_terms(&x, &weight, *lx, true)?;
    check_terms(&y, &weight, *ly, false)?;
    let b = rational_bracket(&x, &y).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(b.parity, Parity::Reversible);
    check_terms(&b, &weight, lx + ly, true)
}

pub fn solver_case(xi: usize, xp: &[Pick]) -> Case {
    let p = pools();
    let (xs, l) = &p.rev[xi];
    let x = pick(xs, xp);
    let w = WeightSpec::sobolev(3.0);
    let s3 = solve_z3(&x).map_err(|e| TestCaseError::fail(e.to_string()))?;
    check_terms(&s3.chi, &w, l - 1, false)?;
    check_terms(&s3.remainder, &w, *l, true)?;
    check_terms(&s3.z_int, &w, *l, true)?;
    let s35 = solve_homological_z3z5(&x).map_err(|e| TestCaseError::fail(e.to_string()))?;
    check_terms(&s35.chi, &w, l - 2, false)?;
    check_terms(&s35.znf_lm1, &w, l - 1, true)?;
    check_terms(&s35.znf_l, &w, *l, true)?;
    prop_assert!(s3.remainder.is_rational_normal_form());
    prop_assert!(s35.znf_l.is_rational_normal_form() && s35.znf_lm1.is_rational_normal_form());
    Ok(())
}

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(config_rng()))
}

fn config_rng() -> proptest::test_runner::RngAlgorithm {
    Config::default().rng_algorithm
}

/// Runs one property family for `cases` deterministic cases.
pub fn run_family(name: &str, cases: u32) -> std::result::Result<(), String> {
    let out = match name {
        "commutator" => runner(cases).run(&(1usize..=2, 1usize..=2, poly_terms(), poly_terms()), |(l1, l2, xt, yt)| {
            commutator_case(l1, l2, &xt, &yt)
        })
        .map_err(|e| e.to_string()),
        "rational" => runner(cases).run(&(0usize..4, 0usize..3, picks(), picks(), any::<bool>()), |(xi, yi, xp, yp, g)| {
            rational_case(xi, yi, &xp, &yp, g)
        })
        .map_err(|e| e.to_string()),
        "solvers" => runner(cases).run(&(1usize..4, picks()), |(xi, xp)| solver_case(xi, &xp)).map_err(|e| e.to_string()),
        other => return Err(format!("unknown property family {other}")),
    };
    out
}

#[allow(dead_code)]
pub const FAMILIES: [&str; 3] = ["commutator", "rational", "solvers"];

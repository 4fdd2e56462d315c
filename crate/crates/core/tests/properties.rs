//! Property tests of the structural invariants, 10^4 cases per family.

mod support;

use kirchhoff_core::nf::rational::term_info;
use support::invariants::{pools, run_family, N};

const CASES: u32 = 10_000;

#[test]
fn polynomial_commutator_keeps_parity_order_and_bound() {
    run_family("commutator", CASES).unwrap();
}

#[test]
fn rational_commutator_keeps_structure() {
    run_family("rational", CASES).unwrap();
}

#[test]
fn homological_solvers_keep_structure() {
    run_family("solvers", CASES).unwrap();
}

#[test]
fn pools_are_homogeneous() {
    let p = pools();
    for (v, l) in p.rev.iter().chain(&p.anti) {
        assert!(!v.is_zero());
        for ((a, m, d), _) in v.terms() {
            assert_eq!(term_info(*a, m, d, N).unwrap(), *l, "{m}");
        }
    }
}

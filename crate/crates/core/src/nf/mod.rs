//! Exact symbolic algebra of polynomial and rational vector fields, the
//! homological solvers, and numeric evaluation of both.

pub mod exact;
pub mod json;
pub mod mono;
pub mod numeric;
pub mod poly;
pub mod rational;
pub mod resonant;
pub mod scalar;
pub mod solvers;

pub use exact::{FractionPair, CQ, Q};
pub use mono::{Kind, Mono};
pub use poly::{bracket, commutator, z1, Parity, PolyVF};
pub use resonant::{
    chi3_explicit, k3_expected, k5_anti_expected, k5_expected, lie_transform, resonant_normal_form, solve_homological_z1,
    taylor_f, taylor_vf, z5_expected, ResonantNormalForm,
};
pub use scalar::{Dual, Scalar};

//! Normal-form machinery, small divisors and spectral simulation for the
//! Kirchhoff string equation `u_tt - (1 + ||u_x||^2) u_xx = 0` on (0, pi)
//! with Dirichlet boundary conditions.

pub mod error;
pub mod space;
pub mod divisors;
pub mod simulator;
pub mod transforms;
pub mod measure;
pub mod nf;

pub use error::{Error, Result};
pub use space::{canonicalize, weighted_norm, zeta_value, ComplexSeq, IndexVector, MonomialIndex, WeightSpec};

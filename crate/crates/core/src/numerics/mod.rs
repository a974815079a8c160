//! Linear algebra, special functions, quadrature and random streams shared by
//! the rest of the crate.

pub mod linalg;
pub mod quadrature;
pub mod rng;
pub mod special;

pub use linalg::{cholesky, dot, inf_norm, solve_pd, CholFactor, SymMatrix};
pub use quadrature::{integrate, integrate_with_error};
pub use rng::{sample_std_normals, RngStream};
pub use special::{std_normal_cdf, std_normal_pdf};

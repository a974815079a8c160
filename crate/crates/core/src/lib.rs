//! Sharpe ratio and Omega measure portfolio tools.
//!
//! * [`market`]: prices, returns and moment estimates.
//! * [`sharpe`]: Sharpe ratio, gradient, KKT checks and the tangency portfolio.
//! * [`sras`]: active-set solver for the long-only maximum-Sharpe portfolio.
//! * [`qpref`]: quadratic-program reference solver and grid oracle.
//! * [`omega`]: Omega measure by quadrature, partial moments and Monte Carlo.
//! * [`skewnorm`]: skew-normal distribution and the skewness sweep.

// `!(x > 0.0)` style checks are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod market;
pub mod numerics;
pub mod omega;
pub mod qpref;
pub mod sharpe;
pub mod skewnorm;
pub mod sras;

pub use error::{Error, Result};

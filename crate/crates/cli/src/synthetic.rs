//! Random benchmark instances.
//!
//! Expected returns are uniform on `[-0.05, 0.15]` and the covariance is
//! `AᵀA/n + 0.01·I` with `A` standard normal, which is positive definite with
//! a condition number of a few hundred. The benchmark is zero, so the excess
//! returns are the expected returns.

use sharpe_omega::market::ExcessModel;
use sharpe_omega::numerics::{RngStream, SymMatrix};
use sharpe_omega::Result;

pub const MU_RANGE: (f64, f64) = (-0.05, 0.15);
pub const RIDGE: f64 = 0.01;

/// Instance `index` of the set drawn from `seed`.
///
/// Every instance has its own stream, so an instance does not depend on how
/// many came before it. Draws with no positive expected return are discarded
/// and redrawn from the same stream.
pub fn instance(n: usize, seed: u64, index: u64) -> Result<ExcessModel> {
    let mut rng = RngStream::derived(seed, index);
    loop {
        let mu: Vec<f64> = (0..n).map(|_| rng.uniform_range(MU_RANGE.0, MU_RANGE.1)).collect();
        let a: Vec<f64> = (0..n * n).map(|_| rng.std_normal()).collect();
        if mu.iter().all(|&m| m <= 0.0) {
            continue;
        }
        let mut sigma = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let s: f64 = (0..n).map(|k| a[k * n + i] * a[k * n + j]).sum::<f64>() / n as f64;
                sigma[i * n + j] = s;
                sigma[j * n + i] = s;
            }
            sigma[i * n + i] += RIDGE;
        }
        return ExcessModel::from_excess(mu, SymMatrix::new(n, sigma)?);
    }
}

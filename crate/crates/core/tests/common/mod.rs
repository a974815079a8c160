#![allow(dead_code)]

use proptest::prelude::*;
use sharpe_omega::market::ExcessModel;
use sharpe_omega::numerics::SymMatrix;

/// `AᵀA/n + ridge·I` for a row-major `n×n` block `a`.
pub fn gram(n: usize, a: &[f64], ridge: f64) -> SymMatrix {
    let mut s = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            s[i * n + j] = (0..n).map(|k| a[k * n + i] * a[k * n + j]).sum::<f64>() / n as f64;
        }
        s[i * n + i] += ridge;
    }
    SymMatrix::new(n, s).unwrap()
}

/// Random PD matrix of dimension `lo..=hi` with entries of `A` in `[-1, 1]`.
pub fn pd_matrix(lo: usize, hi: usize) -> impl Strategy<Value = SymMatrix> {
    (lo..=hi).prop_flat_map(|n| {
        (Just(n), prop::collection::vec(-1.0..1.0f64, n * n), 0.01..0.5f64)
            .prop_map(|(n, a, ridge)| gram(n, &a, ridge))
    })
}

/// Random model with at least one positive excess return.
pub fn model(lo: usize, hi: usize) -> impl Strategy<Value = ExcessModel> {
    pd_matrix(lo, hi)
        .prop_flat_map(|s| {
            let n = s.dim();
            (Just(s), prop::collection::vec(-0.05..0.15f64, n))
        })
        .prop_filter("needs a positive excess return", |(_, e)| e.iter().any(|&x| x > 0.0))
        .prop_map(|(s, e)| ExcessModel::from_excess(e, s).unwrap())
}

/// Nonnegative vector with a positive sum, normalized to unit sum.
pub fn simplex_point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..1.0f64, n)
        .prop_filter("positive sum", |v| v.iter().sum::<f64>() > 1e-3)
        .prop_map(|v| {
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect()
        })
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs()))
}

//! Reference solver for the convex quadratic reformulation of the long-only
//! Sharpe problem,
//!
//! ```text
//! minimize  wᵀΣw   subject to  wᵀe = z,  w ≥ 0
//! ```
//!
//! whose solution, scaled to unit sum, is the maximum-Sharpe long-only
//! portfolio. Solved by projected gradient with Armijo backtracking. It is
//! deliberately independent of the active-set code so the two can check each
//! other. A brute-force simplex grid search is provided for tiny instances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{ExcessModel, PortfolioWeights};
use crate::numerics::{dot, inf_norm, SymMatrix};
use crate::sharpe::sharpe_ratio;

/// Armijo sufficient-decrease constant.
const ARMIJO_C: f64 = 1e-4;
/// Iterate-change stopping threshold, relative to `max(1, ‖w‖∞)`.
pub const STEP_RTOL: f64 = 1e-10;
const MAX_HALVINGS: usize = 80;
const MAX_BISECTIONS: usize = 200;
/// Largest dimension accepted by [`grid_oracle`].
pub const GRID_MAX_DIM: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpInstance {
    pub sigma: SymMatrix,
    pub e: Vec<f64>,
    pub z: f64,
}

impl QpInstance {
    pub fn new(sigma: SymMatrix, e: Vec<f64>, z: f64) -> Result<Self> {
        if e.len() != sigma.dim() {
            return Err(Error::DimensionMismatch {
                expected: sigma.dim(),
                got: e.len(),
            });
        }
        if !e.iter().any(|&x| x > 0.0) {
            return Err(Error::NoPositiveExcess);
        }
        if !(z > 0.0) || !z.is_finite() {
            return Err(Error::InvalidArgument(format!("target z must be positive, got {z}")));
        }
        Ok(Self { sigma, e, z })
    }

    /// Instance for `model` with `z` from [`default_z`].
    pub fn from_model(model: &ExcessModel) -> Result<Self> {
        let z = default_z(&model.e)?;
        Self::new(model.sigma.clone(), model.e.clone(), z)
    }
}

/// `Σᵢ eᵢ` when positive, otherwise `max(e)`.
pub fn default_z(e: &[f64]) -> Result<f64> {
    let max = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return Err(Error::NoPositiveExcess);
    }
    let sum: f64 = e.iter().sum();
    Ok(if sum > 0.0 { sum } else { max })
}

/// Euclidean projection of `v` onto `{w ≥ 0, eᵀw = z}`.
///
/// The projection is `max(0, v + λe)` for the `λ` solving `eᵀw(λ) = z`. That
/// map is nondecreasing in `λ`, so `λ` is bracketed and bisected, then
/// polished in closed form on the identified support.
pub fn project(v: &[f64], e: &[f64], z: f64) -> Result<Vec<f64>> {
    if v.len() != e.len() {
        return Err(Error::DimensionMismatch {
            expected: e.len(),
            got: v.len(),
        });
    }
    if !e.iter().any(|&x| x > 0.0) || !(z > 0.0) {
        return Err(Error::InfeasibleProjection { target: z });
    }
    let attained = |lambda: f64| -> f64 {
        v.iter()
            .zip(e)
            .map(|(vi, ei)| ei * (vi + lambda * ei).max(0.0))
            .sum()
    };

    let min_abs_e = e
        .iter()
        .filter(|x| **x != 0.0)
        .fold(f64::INFINITY, |m, x| m.min(x.abs()));
    let mut width = (inf_norm(v) + z) / min_abs_e;
    if !(width > 0.0) || !width.is_finite() {
        width = 1.0;
    }
    let (mut lo, mut hi) = (-width, width);
    let mut grow = 0;
    while attained(hi) < z {
        hi *= 2.0;
        grow += 1;
        if grow > 2000 || !hi.is_finite() {
            return Err(Error::InfeasibleProjection { target: z });
        }
    }
    grow = 0;
    while attained(lo) > z {
        lo *= 2.0;
        grow += 1;
        if grow > 2000 || !lo.is_finite() {
            return Err(Error::InfeasibleProjection { target: z });
        }
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if attained(mid) < z {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);

    // Closed form on the support found by bisection.
    let support: Vec<usize> = (0..v.len()).filter(|&i| v[i] + lambda * e[i] > 0.0).collect();
    let (mut num, mut den) = (z, 0.0);
    for &i in &support {
        num -= e[i] * v[i];
        den += e[i] * e[i];
    }
    let bisected: Vec<f64> = v.iter().zip(e).map(|(vi, ei)| (vi + lambda * ei).max(0.0)).collect();
    let best = if den > 0.0 {
        let exact = num / den;
        let polished: Vec<f64> = v.iter().zip(e).map(|(vi, ei)| (vi + exact * ei).max(0.0)).collect();
        if (dot(&polished, e) - z).abs() <= (dot(&bisected, e) - z).abs() {
            polished
        } else {
            bisected
        }
    } else {
        bisected
    };
    Ok(best)
}

/// Output of [`solve_qp`].
#[derive(Debug, Clone)]
pub struct QpSolution {
    pub weights: PortfolioWeights,
    /// Solution of the quadratic program before normalization.
    pub raw: Vec<f64>,
    pub iterations: usize,
    /// `wᵀΣw` at every iterate, starting with the initial point.
    pub objective_history: Vec<f64>,
    /// Largest `|eᵀw - z|` seen over the iterates.
    pub max_constraint_error: f64,
}

/// Projected gradient on the quadratic reformulation; returns unit-sum weights.
///
/// Each iteration starts from step `1/‖Σ‖∞`, halving until the Armijo
/// condition holds; stops when `‖wⁱ⁺¹ - wⁱ‖∞ ≤ tol · max(1, ‖wⁱ‖∞)`.
pub fn solve_qp(inst: &QpInstance, tol: f64, max_iter: usize) -> Result<QpSolution> {
    let n = inst.e.len();
    let sigma = &inst.sigma;
    let step0 = 1.0 / sigma.inf_norm();
    let ee = dot(&inst.e, &inst.e);

    let mut w = project(&vec![0.0; n], &inst.e, inst.z)?;
    let mut sw = sigma.mul_vec(&w);
    let mut f = dot(&w, &sw);
    let mut history = vec![f];
    let mut max_err = (dot(&w, &inst.e) - inst.z).abs();

    for iteration in 1..=max_iter {
        let grad: Vec<f64> = sw.iter().map(|x| 2.0 * x).collect();
        let mut t = step0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<f64> = w.iter().zip(&grad).map(|(wi, gi)| wi - t * gi).collect();
            let cand = project(&trial, &inst.e, inst.z)?;
            let delta: Vec<f64> = cand.iter().zip(&w).map(|(a, b)| a - b).collect();
            let cand_sw = sigma.mul_vec(&cand);
            let cand_f = dot(&cand, &cand_sw);
            // Both sides of the Armijo test in a form that survives rounding
            // near the optimum: f(cand) - f(w) = Δᵀ(Σcand + Σw) avoids
            // subtracting two nearly equal objectives, and since eᵀΔ = 0 the
            // e-components of the gradients (dominant at the optimum) are
            // dropped so the constraint residual cannot swamp the decrease.
            let sum_sw: Vec<f64> = cand_sw.iter().zip(&sw).map(|(a, b)| a + b).collect();
            let decrease = dot(&delta, &tangential(&sum_sw, &inst.e, ee));
            let slope = dot(&delta, &tangential(&grad, &inst.e, ee));
            if decrease <= ARMIJO_C * slope {
                accepted = Some((cand, cand_sw, cand_f, delta));
                break;
            }
            t *= 0.5;
        }
        // No acceptable step at machine resolution: w is stationary.
        let Some((cand, cand_sw, cand_f, delta)) = accepted else {
            return finish(inst, w, iteration, history, max_err);
        };
        let change = inf_norm(&delta);
        let scale = inf_norm(&w).max(1.0);
        w = cand;
        sw = cand_sw;
        f = cand_f;
        history.push(f);
        max_err = max_err.max((dot(&w, &inst.e) - inst.z).abs());
        if change <= tol * scale {
            return finish(inst, w, iteration, history, max_err);
        }
    }
    let sum: f64 = w.iter().sum();
    Err(Error::IterationLimit {
        max_iter,
        best: w.iter().map(|x| x / sum).collect(),
        trace: None,
    })
}

/// `v` minus its component along `e`.
fn tangential(v: &[f64], e: &[f64], ee: f64) -> Vec<f64> {
    let c = dot(v, e) / ee;
    v.iter().zip(e).map(|(vi, ei)| vi - c * ei).collect()
}

fn finish(
    inst: &QpInstance,
    raw: Vec<f64>,
    iterations: usize,
    objective_history: Vec<f64>,
    max_constraint_error: f64,
) -> Result<QpSolution> {
    let labels = crate::market::default_labels(raw.len());
    let weights = PortfolioWeights::normalize(labels, &raw)?;
    debug_assert!(inst.e.len() == raw.len());
    Ok(QpSolution {
        weights,
        raw,
        iterations,
        objective_history,
        max_constraint_error,
    })
}

/// Default iteration cap for [`solve_qp`].
pub fn default_max_iter(n: usize) -> usize {
    200_000 + 1000 * n * n
}

/// Solves the reformulation for `model` with the default `z` and relabels.
pub fn solve_model(model: &ExcessModel, tol: f64, max_iter: usize) -> Result<QpSolution> {
    let inst = QpInstance::from_model(model)?;
    let mut sol = solve_qp(&inst, tol, max_iter)?;
    sol.weights.labels = model.labels.clone();
    Ok(sol)
}

/// Best Sharpe ratio over the simplex grid with mesh `step`; lowest
/// lexicographic grid point on ties.
pub fn grid_oracle(model: &ExcessModel, step: f64) -> Result<PortfolioWeights> {
    let n = model.n_assets();
    if n > GRID_MAX_DIM {
        return Err(Error::DimensionTooLarge { n, max: GRID_MAX_DIM });
    }
    let best = simplex_grid_argmax(n, step, |w| sharpe_ratio(w, model).unwrap_or(f64::NEG_INFINITY))?;
    Ok(PortfolioWeights {
        labels: model.labels.clone(),
        w: best.0,
        normalized: true,
    })
}

/// Maximizes `objective` over `{w ≥ 0, Σw = 1}` on a grid of mesh `step`
/// (rounded to the nearest `1/m`). Returns the argmax and its value.
pub fn simplex_grid_argmax<F: FnMut(&[f64]) -> f64>(
    n: usize,
    step: f64,
    mut objective: F,
) -> Result<(Vec<f64>, f64)> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidArgument(format!("grid step must be in (0, 1], got {step}")));
    }
    let m = (1.0 / step).round().max(1.0) as usize;
    let mut best = (vec![0.0; n], f64::NEG_INFINITY);
    for_each_composition(n, m, &mut |counts| {
        let w: Vec<f64> = counts.iter().map(|&c| c as f64 / m as f64).collect();
        let v = objective(&w);
        if v > best.1 {
            best = (w, v);
        }
    });
    Ok(best)
}

/// Calls `f` on every vector of `n` nonnegative integers summing to `m`, in
/// lexicographic order.
pub fn for_each_composition(n: usize, m: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(buf: &mut Vec<usize>, n: usize, left: usize, f: &mut dyn FnMut(&[usize])) {
        if buf.len() + 1 == n {
            buf.push(left);
            f(buf);
            buf.pop();
            return;
        }
        for c in 0..=left {
            buf.push(c);
            rec(buf, n, left - c, f);
            buf.pop();
        }
    }
    if n == 0 {
        return;
    }
    rec(&mut Vec::with_capacity(n), n, m, f);
}

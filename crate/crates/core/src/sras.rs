//! Active-set solver for the long-only Sharpe ratio problem
//!
//! ```text
//! maximize  wᵀe / sqrt(wᵀΣw)   subject to  Σ wᵢ = 1,  w ≥ 0
//! ```
//!
//! The iteration keeps a partition of the assets into a positive set `P` and
//! a zero set `W`. On `P` the unconstrained maximizer `x_P = Σ_P⁻¹ e_P` is
//! the target; the iterate moves toward it until a weight hits zero (that
//! index joins `W`) or it arrives. At the target, the multipliers on `W`
//! decide between termination and releasing the most negative one into `P`.
//!
//! Iterates are kept on the `c = 1` scaling of the tangency ray (they are not
//! unit-sum) and are normalized only on exit. Every iteration is recorded in a
//! [`SolverTrace`] so the monotonicity properties of the method can be checked
//! after the fact with [`verify_trace`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{ExcessModel, PortfolioWeights};
use crate::numerics::{cholesky, dot, inf_norm};
use crate::sharpe::{kkt_report, sharpe_ratio, KktReport};

/// Relative size of `‖p‖∞` below which the iterate is taken to be at the target.
pub const STEP_ZERO_RTOL: f64 = 1e-12;
/// Multipliers at or above `-DUAL_TOL` count as nonnegative.
pub const DUAL_TOL: f64 = 1e-10;
/// Slack allowed when checking per-iteration monotonicity of the Sharpe ratio.
pub const MONOTONE_TOL: f64 = 1e-12;

/// Default iteration cap, `3n²`.
pub fn default_max_iter(n: usize) -> usize {
    3 * n * n
}

/// What an iteration did.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Action {
    /// Target reached and every multiplier on `W` is nonnegative.
    Terminate,
    /// Target reached; index with the most negative multiplier moved from `W` to `P`.
    Release { index: usize, dual: f64 },
    /// Moved toward the target; `blocking` is the index that hit zero when `alpha < 1`.
    Step { alpha: f64, blocking: Option<usize> },
}

/// Snapshot of one iteration, taken before the update is applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveSetState {
    pub iteration: usize,
    /// Current feasible point (not normalized).
    pub w: Vec<f64>,
    /// Indices with positive weight, ascending.
    pub positive: Vec<usize>,
    /// Indices held at zero, ascending.
    pub zero: Vec<usize>,
    /// `Σ_P⁻¹ e_P` zero-padded to length n.
    pub target: Vec<f64>,
    /// `target - w`.
    pub direction: Vec<f64>,
    /// `‖Σ_P x_P - e_P‖∞` of the target solve.
    pub target_residual: f64,
    /// Multipliers on `zero` (same order) when the target was reached.
    pub duals: Option<Vec<f64>>,
    pub sharpe: f64,
    pub action: Action,
}

impl ActiveSetState {
    pub fn alpha(&self) -> Option<f64> {
        match self.action {
            Action::Step { alpha, .. } => Some(alpha),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceStatus {
    Converged,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverTrace {
    pub states: Vec<ActiveSetState>,
    pub status: TraceStatus,
    pub sharpe_per_iteration: Vec<f64>,
}

impl SolverTrace {
    pub fn iterations(&self) -> usize {
        self.states.len()
    }
}

/// Result of a successful [`solve`].
#[derive(Debug, Clone)]
pub struct SrasSolution {
    pub weights: PortfolioWeights,
    pub sharpe: f64,
    pub kkt: KktReport,
    pub trace: SolverTrace,
}

impl SrasSolution {
    pub fn iterations(&self) -> usize {
        self.trace.iterations()
    }
}

/// Index of the single asset with the best Sharpe ratio `e_j / sqrt(Σ_jj)`,
/// lowest index on ties.
pub fn initial_index(model: &ExcessModel) -> Result<usize> {
    if !model.has_positive_excess() {
        return Err(Error::NoPositiveExcess);
    }
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (j, e) in model.e.iter().enumerate() {
        let v = e / model.sigma.get(j, j).sqrt();
        if v > best_val {
            best = j;
            best_val = v;
        }
    }
    Ok(best)
}

/// Solves the long-only Sharpe problem; see the module docs.
///
/// `tol` is the KKT tolerance reported on the returned point. On hitting
/// `max_iter` the error carries the normalized best point and the trace.
pub fn solve(model: &ExcessModel, tol: f64, max_iter: usize) -> Result<SrasSolution> {
    let n = model.n_assets();
    let first = initial_index(model)?;

    let mut in_p = vec![false; n];
    in_p[first] = true;
    // Start on the c = 1 ray of the single-asset problem, x_j = e_j / Σ_jj.
    let mut w = vec![0.0; n];
    w[first] = model.e[first] / model.sigma.get(first, first);

    let mut states = Vec::new();
    let mut sharpes = Vec::new();

    for iteration in 0..max_iter {
        let positive: Vec<usize> = (0..n).filter(|&j| in_p[j]).collect();
        let zero: Vec<usize> = (0..n).filter(|&j| !in_p[j]).collect();
        let (target, target_residual) = target_on(model, &positive)?;
        let direction: Vec<f64> = target.iter().zip(&w).map(|(x, wi)| x - wi).collect();
        let sharpe = sharpe_ratio(&w, model)?;
        sharpes.push(sharpe);

        let at_target = inf_norm(&direction) <= STEP_ZERO_RTOL * inf_norm(&w).max(1.0);
        let mut duals = None;
        let action = if at_target {
            let mu = multipliers(model, &w, &zero);
            let mut most_negative: Option<(usize, f64)> = None;
            for (&j, &m) in zero.iter().zip(&mu) {
                if m < -DUAL_TOL && most_negative.is_none_or(|(_, best)| m < best) {
                    most_negative = Some((j, m));
                }
            }
            duals = Some(mu);
            match most_negative {
                None => Action::Terminate,
                Some((index, dual)) => Action::Release { index, dual },
            }
        } else {
            let mut alpha = 1.0;
            let mut blocking = None;
            for &j in &positive {
                if direction[j] < 0.0 {
                    let ratio = -w[j] / direction[j];
                    if ratio < alpha {
                        alpha = ratio;
                        blocking = Some(j);
                    }
                }
            }
            Action::Step { alpha, blocking }
        };

        states.push(ActiveSetState {
            iteration,
            w: w.clone(),
            positive,
            zero,
            target: target.clone(),
            direction: direction.clone(),
            target_residual,
            duals,
            sharpe,
            action: action.clone(),
        });

        match action {
            Action::Terminate => {
                let trace = SolverTrace {
                    states,
                    status: TraceStatus::Converged,
                    sharpe_per_iteration: sharpes,
                };
                return finish(model, &w, tol, trace);
            }
            Action::Release { index, .. } => in_p[index] = true,
            Action::Step { alpha, blocking } => match blocking {
                None => w = target,
                Some(h) => {
                    for (wi, pi) in w.iter_mut().zip(&direction) {
                        *wi = (*wi + alpha * pi).max(0.0);
                    }
                    w[h] = 0.0;
                    in_p[h] = false;
                }
            },
        }
    }

    let trace = SolverTrace {
        states,
        status: TraceStatus::IterationLimit,
        sharpe_per_iteration: sharpes,
    };
    let sum: f64 = w.iter().sum();
    Err(Error::IterationLimit {
        max_iter,
        best: w.iter().map(|x| x / sum).collect(),
        trace: Some(Box::new(trace)),
    })
}

/// `Σ_P⁻¹ e_P` padded with zeros, plus the residual of the solve.
fn target_on(model: &ExcessModel, positive: &[usize]) -> Result<(Vec<f64>, f64)> {
    let sigma_p = model.sigma.principal(positive);
    let e_p: Vec<f64> = positive.iter().map(|&j| model.e[j]).collect();
    let x_p = cholesky(&sigma_p)?.solve(&e_p)?;
    let residual = sigma_p
        .mul_vec(&x_p)
        .iter()
        .zip(&e_p)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    let mut x = vec![0.0; model.n_assets()];
    for (&j, v) in positive.iter().zip(x_p) {
        x[j] = v;
    }
    Ok((x, residual))
}

/// `(wᵀe)(Σw)_j / (wᵀΣw)^{3/2} - e_j / sqrt(wᵀΣw)` for `j` in `zero`.
fn multipliers(model: &ExcessModel, w: &[f64], zero: &[usize]) -> Vec<f64> {
    let sw = model.sigma.mul_vec(w);
    let var = dot(w, &sw);
    let sd = var.sqrt();
    let ret = dot(w, &model.e);
    zero.iter()
        .map(|&j| ret * sw[j] / (var * sd) - model.e[j] / sd)
        .collect()
}

fn finish(model: &ExcessModel, w: &[f64], tol: f64, trace: SolverTrace) -> Result<SrasSolution> {
    let sum: f64 = w.iter().sum();
    // Every iterate keeps wᵀe > 0 with w ≥ 0, so the sum is positive.
    if !(sum > 0.0) {
        return Err(Error::DegenerateNormalization { sum });
    }
    let weights = PortfolioWeights {
        labels: model.labels.clone(),
        w: w.iter().map(|x| x / sum).collect(),
        normalized: true,
    };
    let sharpe = sharpe_ratio(&weights.w, model)?;
    let kkt = kkt_report(&weights.w, model, tol)?;
    Ok(SrasSolution {
        weights,
        sharpe,
        kkt,
        trace,
    })
}

/// Outcome of [`verify_trace`]. Each field is `true` when its check passed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceVerification {
    /// `S(wⁱ⁺¹) ≥ S(wⁱ) - 1e-12` for all i.
    pub monotone: bool,
    /// `S(wⁱ⁺ⁿ) > S(wⁱ)` for every window ending at or before the last iteration.
    pub window_increase: bool,
    /// Every release had a multiplier below `-DUAL_TOL`, the smallest on `W`.
    pub releases_justified: bool,
    /// Every blocking-constraint addition had `alpha < 1`.
    pub blocking_justified: bool,
    /// `w ≥ 0` and `w_j = 0` on `W` at every iteration.
    pub feasible: bool,
    pub failures: Vec<String>,
}

impl TraceVerification {
    pub fn all_passed(&self) -> bool {
        self.monotone
            && self.window_increase
            && self.releases_justified
            && self.blocking_justified
            && self.feasible
    }
}

/// Checks a trace against the convergence properties of the method.
pub fn verify_trace(trace: &SolverTrace, n: usize) -> TraceVerification {
    let s = &trace.sharpe_per_iteration;
    let mut failures = Vec::new();

    let mut monotone = true;
    for (i, pair) in s.windows(2).enumerate() {
        if pair[1] < pair[0] - MONOTONE_TOL * pair[0].abs().max(1.0) {
            monotone = false;
            failures.push(format!("sharpe decreased at iteration {}: {} -> {}", i + 1, pair[0], pair[1]));
        }
    }

    let mut window_increase = true;
    if n > 0 {
        for i in 0..s.len().saturating_sub(n) {
            if !(s[i + n] > s[i]) {
                window_increase = false;
                failures.push(format!(
                    "no strict increase over iterations {i}..{}: {} -> {}",
                    i + n,
                    s[i],
                    s[i + n]
                ));
            }
        }
    }

    let mut releases_justified = true;
    let mut blocking_justified = true;
    let mut feasible = true;
    for st in &trace.states {
        if st.w.iter().any(|&x| x < 0.0) || st.zero.iter().any(|&j| st.w[j] != 0.0) {
            feasible = false;
            failures.push(format!("infeasible iterate at iteration {}", st.iteration));
        }
        match &st.action {
            Action::Release { index, dual } => {
                let ok = match &st.duals {
                    Some(mu) => {
                        let min = mu.iter().cloned().fold(f64::INFINITY, f64::min);
                        *dual < -DUAL_TOL && *dual == min && st.zero.contains(index)
                    }
                    None => false,
                };
                if !ok {
                    releases_justified = false;
                    failures.push(format!("unjustified release at iteration {}", st.iteration));
                }
            }
            Action::Step {
                alpha,
                blocking: Some(h),
            } => {
                if !(*alpha < 1.0) || !st.positive.contains(h) {
                    blocking_justified = false;
                    failures.push(format!(
                        "blocking index {h} added with alpha {alpha} at iteration {}",
                        st.iteration
                    ));
                }
            }
            Action::Step { alpha, blocking: None } => {
                if *alpha != 1.0 {
                    blocking_justified = false;
                    failures.push(format!("partial step without a blocking index at iteration {}", st.iteration));
                }
            }
            Action::Terminate => {
                if let Some(mu) = &st.duals {
                    if mu.iter().any(|&m| m < -DUAL_TOL) {
                        releases_justified = false;
                        failures.push("terminated with a negative multiplier".into());
                    }
                }
            }
        }
    }

    TraceVerification {
        monotone,
        window_increase,
        releases_justified,
        blocking_justified,
        feasible,
        failures,
    }
}

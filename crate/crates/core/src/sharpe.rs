//! Sharpe ratio of excess returns, its gradient, the KKT certificate for the
//! long-only problem and the closed-form unconstrained (tangency) optimum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{ExcessModel, PortfolioWeights};
use crate::numerics::{dot, inf_norm, solve_pd};

/// Default tolerance for gradient-zero checks.
pub const GRADIENT_TOL: f64 = 1e-10;
/// Default tolerance for KKT certificates.
pub const KKT_TOL: f64 = 1e-8;

/// Weights at or below this fraction of the largest weight count as zero in
/// [`kkt_report`].
const ZERO_WEIGHT_RTOL: f64 = 1e-12;

fn variance(w: &[f64], model: &ExcessModel) -> Result<f64> {
    if w.len() != model.n_assets() {
        return Err(Error::DimensionMismatch {
            expected: model.n_assets(),
            got: w.len(),
        });
    }
    let var = model.sigma.quad_form(w);
    if !(var > 0.0) {
        return Err(Error::DegeneratePortfolio);
    }
    Ok(var)
}

/// `wᵀe / sqrt(wᵀΣw)`.
pub fn sharpe_ratio(w: &[f64], model: &ExcessModel) -> Result<f64> {
    let var = variance(w, model)?;
    Ok(dot(w, &model.e) / var.sqrt())
}

/// `e / sqrt(wᵀΣw) - (wᵀe) Σw / (wᵀΣw)^{3/2}`.
pub fn sharpe_gradient(w: &[f64], model: &ExcessModel) -> Result<Vec<f64>> {
    let var = variance(w, model)?;
    let sd = var.sqrt();
    let ret = dot(w, &model.e);
    let sw = model.sigma.mul_vec(w);
    Ok(model
        .e
        .iter()
        .zip(&sw)
        .map(|(e, s)| e / sd - ret * s / (var * sd))
        .collect())
}

/// `sqrt(eᵀ Σ⁻¹ e)`, the largest Sharpe ratio over all portfolios.
pub fn max_sharpe(model: &ExcessModel) -> Result<f64> {
    let x = solve_pd(&model.sigma, &model.e)?;
    Ok(dot(&x, &model.e).max(0.0).sqrt())
}

/// Tangency portfolio `Σ⁻¹e / Σᵢ(Σ⁻¹e)ᵢ`, optimal when short sales are allowed.
///
/// Fails with [`Error::DegenerateNormalization`] when the ray cannot be scaled
/// to unit sum while keeping its direction: the sum is zero (to 1e-12 relative
/// to the ray's 1-norm) or negative, in which case normalizing would flip the
/// sign and produce the Sharpe minimizer. The error carries the signed sum.
pub fn unconstrained_optimum(model: &ExcessModel) -> Result<PortfolioWeights> {
    let x = solve_pd(&model.sigma, &model.e)?;
    let sum: f64 = x.iter().sum();
    let l1: f64 = x.iter().map(|v| v.abs()).sum();
    if !(sum > 1e-12 * l1) {
        return Err(Error::DegenerateNormalization { sum });
    }
    Ok(PortfolioWeights {
        labels: model.labels.clone(),
        w: x.iter().map(|v| v / sum).collect(),
        normalized: true,
    })
}

/// First-order optimality report for the long-only problem.
///
/// Duals are the unscaled multipliers `μ = -∇S(w)` on zero coordinates (0
/// elsewhere). Multiplying them by `sqrt(wᵀΣw)` gives the scaled form used in
/// some derivations; only their sign matters for optimality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    pub stationarity_residual: Vec<f64>,
    pub duals: Vec<f64>,
    pub stationarity: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub complementarity: f64,
    pub max_violation: f64,
    pub tol: f64,
}

impl KktReport {
    pub fn is_optimal(&self) -> bool {
        self.max_violation <= self.tol
    }
}

/// Evaluates the KKT conditions at `w`. Never fails on a violation; it reports
/// it. Errors only when the gradient is undefined.
pub fn kkt_report(w: &[f64], model: &ExcessModel, tol: f64) -> Result<KktReport> {
    let grad = sharpe_gradient(w, model)?;
    let zero_cut = ZERO_WEIGHT_RTOL * inf_norm(w);
    let duals: Vec<f64> = w
        .iter()
        .zip(&grad)
        .map(|(&wi, &g)| if wi <= zero_cut { -g } else { 0.0 })
        .collect();
    let stationarity_residual: Vec<f64> = grad.iter().zip(&duals).map(|(g, m)| g + m).collect();
    let stationarity = inf_norm(&stationarity_residual);
    let primal_infeasibility = w.iter().fold(0.0_f64, |m, &x| m.max(-x));
    let dual_infeasibility = duals.iter().fold(0.0_f64, |m, &x| m.max(-x));
    let complementarity = dot(&duals, w).abs();
    let max_violation = stationarity
        .max(primal_infeasibility)
        .max(dual_infeasibility)
        .max(complementarity);
    Ok(KktReport {
        stationarity_residual,
        duals,
        stationarity,
        primal_infeasibility,
        dual_infeasibility,
        complementarity,
        max_violation,
        tol,
    })
}

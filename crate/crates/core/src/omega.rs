//! The Omega measure of a scalar return distribution,
//!
//! ```text
//! Ω(L) = ∫_L^∞ (1 - F(r)) dr / ∫_{-∞}^L F(r) dr = E[(R - L)⁺] / E[(L - R)⁺]
//!      = 1 + (E[R] - L) / E[(L - R)⁺]
//! ```
//!
//! computed three independent ways: quadrature of the distribution function,
//! quadrature of the lower partial moment, and Monte Carlo. For normal returns
//! the closed form `Ω = G(z)`, `z = (L - μ̄)/σ̄`, is decreasing in `z`; since
//! the Sharpe ratio is `-z`, maximizing either over portfolios of jointly
//! normal assets picks the same portfolio. [`argmax_equivalence_probe`] checks
//! that on a simplex grid.

use std::cell::RefCell;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::ExcessModel;
use crate::numerics::{integrate_with_error, std_normal_cdf, std_normal_pdf, RngStream};
use crate::qpref::{for_each_composition, GRID_MAX_DIM};
use crate::skewnorm::{self, CdfTable, SkewNormalParams, TRUNCATION_SCALES};

/// Monte Carlo sample count used when none is given.
pub const DEFAULT_MC_SAMPLES: usize = 10_000_000;
/// Samples per independently seeded Monte Carlo block.
pub const MC_BLOCK: usize = 100_000;
/// Smallest accepted Monte Carlo sample count.
pub const MIN_MC_SAMPLES: usize = 1_000;

/// Law of a scalar portfolio return.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ReturnDistribution {
    Normal { mean: f64, std_dev: f64 },
    SkewNormal(SkewNormalParams),
}

impl ReturnDistribution {
    pub fn normal(mean: f64, std_dev: f64) -> Result<Self> {
        if !(std_dev > 0.0) || !std_dev.is_finite() || !mean.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "normal distribution needs finite mean and positive standard deviation, got ({mean}, {std_dev})"
            )));
        }
        Ok(Self::Normal { mean, std_dev })
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::Normal { mean, .. } => *mean,
            Self::SkewNormal(p) => p.mean(),
        }
    }

    pub fn std_dev(&self) -> f64 {
        match self {
            Self::Normal { std_dev, .. } => *std_dev,
            Self::SkewNormal(p) => p.std_dev(),
        }
    }

    pub fn pdf(&self, r: f64) -> f64 {
        match self {
            Self::Normal { mean, std_dev } => std_normal_pdf((r - mean) / std_dev) / std_dev,
            Self::SkewNormal(p) => skewnorm::pdf(p, r),
        }
    }

    /// Truncated integration domain: 14 scale units either side of the centre.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Normal { mean, std_dev } => (
                mean - TRUNCATION_SCALES * std_dev,
                mean + TRUNCATION_SCALES * std_dev,
            ),
            Self::SkewNormal(p) => p.support(),
        }
    }

    fn draw(&self, rng: &mut RngStream) -> f64 {
        match self {
            Self::Normal { mean, std_dev } => mean + std_dev * rng.std_normal(),
            Self::SkewNormal(p) => skewnorm::draw(p, rng),
        }
    }
}

/// Evaluates `F` for a distribution, reusing setup work across calls.
enum Cdf {
    Normal { mean: f64, std_dev: f64 },
    Table(CdfTable),
}

impl Cdf {
    fn new(dist: &ReturnDistribution, tol: f64) -> Result<Self> {
        Ok(match dist {
            ReturnDistribution::Normal { mean, std_dev } => Cdf::Normal {
                mean: *mean,
                std_dev: *std_dev,
            },
            ReturnDistribution::SkewNormal(p) => Cdf::Table(CdfTable::new(*p, tol)?),
        })
    }

    fn eval(&self, r: f64) -> Result<f64> {
        match self {
            Cdf::Normal { mean, std_dev } => Ok(std_normal_cdf((r - mean) / std_dev)),
            Cdf::Table(t) => t.eval(r),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OmegaMethod {
    /// Ratio of the integrated survival and distribution functions.
    Quadrature,
    /// `1 + (E[R] - L)/E[(L - R)⁺]` with the partial moment by quadrature.
    PartialMoment,
    /// Same identity with the partial moment estimated from samples.
    MonteCarlo,
    /// Normal closed form.
    ClosedForm,
}

impl OmegaMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Quadrature => "quadrature",
            Self::PartialMoment => "partial-moment",
            Self::MonteCarlo => "monte-carlo",
            Self::ClosedForm => "closed-form",
        }
    }
}

impl std::str::FromStr for OmegaMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadrature" => Ok(Self::Quadrature),
            "partial-moment" => Ok(Self::PartialMoment),
            "monte-carlo" => Ok(Self::MonteCarlo),
            "closed-form" => Ok(Self::ClosedForm),
            other => Err(Error::InvalidArgument(format!(
                "unknown omega method `{other}` (expected quadrature, partial-moment, monte-carlo or closed-form)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaEstimate {
    pub value: f64,
    pub method: OmegaMethod,
    /// Quadrature error bound, or Monte Carlo standard error.
    pub error_estimate: f64,
    pub threshold: f64,
}

/// Dispatches to the estimator for `method`. `tol` is used by the quadrature
/// methods, `n_samples` and `seed` by Monte Carlo.
pub fn estimate(
    dist: &ReturnDistribution,
    threshold: f64,
    method: OmegaMethod,
    tol: f64,
    n_samples: usize,
    seed: u64,
) -> Result<OmegaEstimate> {
    match method {
        OmegaMethod::Quadrature => omega_cdf_ratio(dist, threshold, tol),
        OmegaMethod::PartialMoment => omega_partial_moment(dist, threshold, tol),
        OmegaMethod::MonteCarlo => omega_monte_carlo(dist, threshold, n_samples, seed),
        OmegaMethod::ClosedForm => match dist {
            ReturnDistribution::Normal { mean, std_dev } => {
                Ok(omega_elliptical_normal(*mean, *std_dev, threshold))
            }
            ReturnDistribution::SkewNormal(_) => Err(Error::InvalidArgument(
                "the closed form applies to normal returns only".into(),
            )),
        },
    }
}

/// Integrates `f` over `[a, b] ∩ [lo, hi]`, treating `f` as `outside` beyond
/// the truncated support.
fn truncated_integral<F: Fn(f64) -> Result<f64>>(
    f: F,
    a: f64,
    b: f64,
    support: (f64, f64),
    outside_below: f64,
    outside_above: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    let (lo, hi) = support;
    let mut value = 0.0;
    if a < lo {
        value += outside_below * (lo.min(b) - a);
    }
    if b > hi {
        value += outside_above * (b - hi.max(a));
    }
    let (ia, ib) = (a.max(lo), b.min(hi));
    if !(ia < ib) {
        return Ok((value, 0.0));
    }
    let failure = RefCell::new(None);
    let (v, err) = integrate_with_error(
        |x| match f(x) {
            Ok(y) => y,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        ia,
        ib,
        tol,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok((value + v, err))
}

/// `∫_{-∞}^L F(r) dr` with its error bound.
pub fn lower_cdf_area(dist: &ReturnDistribution, threshold: f64, tol: f64) -> Result<(f64, f64)> {
    let cdf = Cdf::new(dist, tol * 1e-2)?;
    let (lo, _) = dist.support();
    if threshold <= lo {
        return Ok((0.0, 0.0));
    }
    truncated_integral(|r| cdf.eval(r), lo, threshold, dist.support(), 0.0, 1.0, tol)
}

/// `∫_L^∞ (1 - F(r)) dr` with its error bound.
pub fn upper_survival_area(dist: &ReturnDistribution, threshold: f64, tol: f64) -> Result<(f64, f64)> {
    let cdf = Cdf::new(dist, tol * 1e-2)?;
    let (_, hi) = dist.support();
    if threshold >= hi {
        return Ok((0.0, 0.0));
    }
    truncated_integral(|r| Ok(1.0 - cdf.eval(r)?), threshold, hi, dist.support(), 1.0, 0.0, tol)
}

/// `E[(L - R)⁺] = ∫_{-∞}^L (L - r) f(r) dr` with its error bound.
pub fn lower_partial_moment(dist: &ReturnDistribution, threshold: f64, tol: f64) -> Result<(f64, f64)> {
    let (lo, hi) = dist.support();
    if threshold <= lo {
        return Ok((0.0, 0.0));
    }
    integrate_with_error(|r| (threshold - r) * dist.pdf(r), lo, threshold.min(hi), tol)
}

/// `E[(R - L)⁺] = ∫_L^∞ (r - L) f(r) dr` with its error bound.
pub fn upper_partial_moment(dist: &ReturnDistribution, threshold: f64, tol: f64) -> Result<(f64, f64)> {
    let (lo, hi) = dist.support();
    if threshold >= hi {
        return Ok((0.0, 0.0));
    }
    integrate_with_error(|r| (r - threshold) * dist.pdf(r), threshold.max(lo), hi, tol)
}

/// Omega as the ratio of the integrated survival function above `L` to the
/// integrated distribution function below `L`.
pub fn omega_cdf_ratio(dist: &ReturnDistribution, threshold: f64, tol: f64) -> Result<OmegaEstimate> {
    check_tol(tol)?;
    let (den, den_err) = lower_cdf_area(dist, threshold, tol)?;
    if !(den > tol) {
        return Err(Error::DegenerateDenominator { value: den });
    }
    let (num, num_err) = upper_survival_area(dist, threshold, tol)?;
    let value = num / den;
    // Inner distribution-function error (tol/100 per evaluation) over the support.
    let (lo, hi) = dist.support();
    let inner = tol * 1e-2 * (hi - lo);
    let error_estimate = (num_err + inner + value * (den_err + inner)) / den;
    Ok(OmegaEstimate {
        value,
        method: OmegaMethod::Quadrature,
        error_estimate,
        threshold,
    })
}

/// Omega from the partial-moment identity `Ω = 1 + (E[R] - L)/E[(L - R)⁺]`.
pub fn omega_partial_moment(dist: &ReturnDistribution, threshold: f64, tol: f64) -> Result<OmegaEstimate> {
    check_tol(tol)?;
    let (lpm, err) = lower_partial_moment(dist, threshold, tol)?;
    if !(lpm > tol) {
        return Err(Error::DegenerateDenominator { value: lpm });
    }
    let excess = dist.mean() - threshold;
    Ok(OmegaEstimate {
        value: 1.0 + excess / lpm,
        method: OmegaMethod::PartialMoment,
        error_estimate: excess.abs() * err / (lpm * (lpm - err)),
        threshold,
    })
}

/// Omega from the partial-moment identity with `E[(L - R)⁺]` estimated from
/// `n_samples` draws.
///
/// Draws are taken in blocks of [`MC_BLOCK`], block `k` using stream `k` of
/// `seed`, and reduced in block order, so the result does not depend on the
/// number of threads.
pub fn omega_monte_carlo(
    dist: &ReturnDistribution,
    threshold: f64,
    n_samples: usize,
    seed: u64,
) -> Result<OmegaEstimate> {
    if n_samples < MIN_MC_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_MC_SAMPLES} samples, got {n_samples}"
        )));
    }
    let blocks = n_samples.div_ceil(MC_BLOCK);
    let partial: Vec<(f64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|k| {
            let len = MC_BLOCK.min(n_samples - k * MC_BLOCK);
            let mut rng = RngStream::derived(seed, k as u64);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..len {
                let shortfall = (threshold - dist.draw(&mut rng)).max(0.0);
                s += shortfall;
                s2 += shortfall * shortfall;
            }
            (s, s2)
        })
        .collect();
    let (sum, sum_sq) = partial
        .iter()
        .fold((0.0, 0.0), |(a, b), (s, s2)| (a + s, b + s2));
    let n = n_samples as f64;
    let lpm = sum / n;
    if !(lpm > 0.0) {
        return Err(Error::DegenerateDenominator { value: lpm });
    }
    let var = ((sum_sq - n * lpm * lpm) / (n - 1.0)).max(0.0);
    let se_lpm = (var / n).sqrt();
    let excess = dist.mean() - threshold;
    Ok(OmegaEstimate {
        value: 1.0 + excess / lpm,
        method: OmegaMethod::MonteCarlo,
        error_estimate: excess.abs() * se_lpm / (lpm * lpm),
        threshold,
    })
}

/// `zΦ(z) + φ(z)`, the lower partial moment of a standard normal at `z`.
pub fn normal_lpm_standardized(z: f64) -> f64 {
    z * std_normal_cdf(z) + std_normal_pdf(z)
}

/// `G(z) = 1 - z / (zΦ(z) + φ(z))`: Omega of normal returns as a function of
/// the standardized threshold `z = (L - μ̄)/σ̄`. Strictly decreasing.
pub fn normal_omega_of_z(z: f64) -> f64 {
    1.0 - z / normal_lpm_standardized(z)
}

/// Closed-form Omega of normal returns,
/// `1 + (μ̄ - L) / (σ̄ (zΦ(z) + φ(z)))`; exactly 1 when `μ̄ = L`.
pub fn omega_elliptical_normal(mean: f64, std_dev: f64, threshold: f64) -> OmegaEstimate {
    let z = (threshold - mean) / std_dev;
    let value = if z == 0.0 { 1.0 } else { normal_omega_of_z(z) };
    OmegaEstimate {
        value,
        method: OmegaMethod::ClosedForm,
        error_estimate: 0.0,
        threshold,
    }
}

/// How the probe evaluates Omega on each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ProbeOmega {
    ClosedForm,
    Quadrature { tol: f64 },
}

/// Result of [`argmax_equivalence_probe`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub step: f64,
    pub grid_points: usize,
    pub sharpe_argmax: Vec<f64>,
    pub omega_argmax: Vec<f64>,
    pub max_sharpe: f64,
    pub max_omega: f64,
    /// `‖sharpe_argmax - omega_argmax‖∞` in units of `step`.
    pub cell_distance: f64,
    pub coincide: bool,
    /// Both objectives constant over the grid (no excess return anywhere).
    pub flat_objective: bool,
}

/// Compares the simplex-grid argmax of the Sharpe ratio and of the Omega
/// measure, assuming jointly normal returns; Omega uses the closed form.
pub fn argmax_equivalence_probe(model: &ExcessModel, step: f64) -> Result<EquivalenceReport> {
    probe_on_grid(model, step, ProbeOmega::ClosedForm, None)
}

/// As [`argmax_equivalence_probe`], with a choice of Omega evaluation.
pub fn argmax_equivalence_probe_with(
    model: &ExcessModel,
    step: f64,
    method: ProbeOmega,
) -> Result<EquivalenceReport> {
    probe_on_grid(model, step, method, None)
}

/// Runs the probe on a coarse grid, then again on a fine grid restricted to
/// the coarse cells around the coarse Sharpe argmax.
pub fn argmax_equivalence_refined(
    model: &ExcessModel,
    coarse: f64,
    fine: f64,
    method: ProbeOmega,
) -> Result<(EquivalenceReport, EquivalenceReport)> {
    let first = probe_on_grid(model, coarse, method, None)?;
    let centre = first.sharpe_argmax.clone();
    let second = probe_on_grid(model, fine, method, Some((centre, coarse)))?;
    Ok((first, second))
}

fn probe_on_grid(
    model: &ExcessModel,
    step: f64,
    method: ProbeOmega,
    window: Option<(Vec<f64>, f64)>,
) -> Result<EquivalenceReport> {
    let n = model.n_assets();
    if n > GRID_MAX_DIM - 1 {
        return Err(Error::DimensionTooLarge { n, max: GRID_MAX_DIM - 1 });
    }
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidArgument(format!("grid step must be in (0, 1], got {step}")));
    }
    let m = (1.0 / step).round().max(1.0) as usize;
    let mut points = Vec::new();
    for_each_composition(n, m, &mut |c| {
        let w: Vec<f64> = c.iter().map(|&k| k as f64 / m as f64).collect();
        let inside = window.as_ref().is_none_or(|(centre, radius)| {
            w.iter().zip(centre).all(|(a, b)| (a - b).abs() <= radius + 1e-12)
        });
        if inside {
            points.push(w);
        }
    });

    let benchmark = model.benchmark;
    let values: Vec<(f64, f64)> = points
        .par_iter()
        .map(|w| -> Result<(f64, f64)> {
            let excess: f64 = w.iter().zip(&model.e).map(|(a, b)| a * b).sum();
            let sd = model.sigma.quad_form(w).sqrt();
            let sharpe = excess / sd;
            let omega = match method {
                ProbeOmega::ClosedForm => omega_elliptical_normal(excess + benchmark, sd, benchmark).value,
                ProbeOmega::Quadrature { tol } => {
                    let dist = ReturnDistribution::normal(excess + benchmark, sd)?;
                    omega_cdf_ratio(&dist, benchmark, tol)?.value
                }
            };
            Ok((sharpe, omega))
        })
        .collect::<Result<_>>()?;

    let mut is = 0;
    let mut io = 0;
    for (k, (s, o)) in values.iter().enumerate() {
        if *s > values[is].0 {
            is = k;
        }
        if *o > values[io].1 {
            io = k;
        }
    }
    let (smin, smax) = min_max(values.iter().map(|v| v.0));
    let (omin, omax) = min_max(values.iter().map(|v| v.1));
    let flat_objective = smax - smin <= 1e-12 && omax - omin <= 1e-8;
    let cell_distance = points[is]
        .iter()
        .zip(&points[io])
        .fold(0.0_f64, |d, (a, b)| d.max((a - b).abs()))
        / (1.0 / m as f64);
    Ok(EquivalenceReport {
        step: 1.0 / m as f64,
        grid_points: points.len(),
        sharpe_argmax: points[is].clone(),
        omega_argmax: points[io].clone(),
        max_sharpe: values[is].0,
        max_omega: values[io].1,
        cell_distance,
        coincide: flat_objective || cell_distance <= 1.0 + 1e-9,
        flat_objective,
    })
}

fn min_max(it: impl Iterator<Item = f64>) -> (f64, f64) {
    it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)))
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")))
    }
}

//! Skew-normal distribution parameterized by its first three moments, and the
//! Omega-versus-skewness sweep at fixed mean and standard deviation.

use std::f64::consts::{FRAC_2_PI, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{integrate, std_normal_cdf, std_normal_pdf, RngStream};
use crate::omega::{self, OmegaMethod, ReturnDistribution};

/// Largest |skewness| accepted by [`from_moments`].
pub const MAX_ABS_SKEWNESS: f64 = 0.99;
/// Half-width of the truncated support in units of the scale.
pub const TRUNCATION_SCALES: f64 = 14.0;
/// Absolute tolerance of [`cdf`].
pub const CDF_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkewNormalParams {
    pub epsilon: f64,
    pub omega: f64,
    pub alpha: f64,
    pub delta: f64,
}

impl SkewNormalParams {
    /// From location, scale and shape.
    pub fn new(epsilon: f64, omega: f64, alpha: f64) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() || !epsilon.is_finite() || !alpha.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "invalid skew-normal parameters (epsilon={epsilon}, omega={omega}, alpha={alpha})"
            )));
        }
        Ok(Self {
            epsilon,
            omega,
            alpha,
            delta: alpha / (1.0 + alpha * alpha).sqrt(),
        })
    }

    pub fn mean(&self) -> f64 {
        self.epsilon + self.omega * self.delta * FRAC_2_PI.sqrt()
    }

    pub fn variance(&self) -> f64 {
        self.omega * self.omega * (1.0 - FRAC_2_PI * self.delta * self.delta)
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    pub fn skewness(&self) -> f64 {
        let m = self.delta * FRAC_2_PI.sqrt();
        0.5 * (4.0 - PI) * m.powi(3) / (1.0 - m * m).powf(1.5)
    }

    /// `[ε - 14ω, ε + 14ω]`
    pub fn support(&self) -> (f64, f64) {
        (
            self.epsilon - TRUNCATION_SCALES * self.omega,
            self.epsilon + TRUNCATION_SCALES * self.omega,
        )
    }
}

/// Parameters with the given mean, standard deviation and skewness.
///
/// The scale uses the skew-normal variance `ω²(1 - 2δ²/π)`, i.e.
/// `ω = σ / sqrt(1 - 2δ²/π)`.
pub fn from_moments(mu: f64, sigma: f64, gamma1: f64) -> Result<SkewNormalParams> {
    if !(gamma1.abs() <= MAX_ABS_SKEWNESS) {
        return Err(Error::SkewnessOutOfRange(gamma1));
    }
    if !(sigma > 0.0) || !sigma.is_finite() || !mu.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "need finite mean and positive standard deviation, got ({mu}, {sigma})"
        )));
    }
    let g = gamma1.abs().powf(2.0 / 3.0);
    let k = (0.5 * (4.0 - PI)).powf(2.0 / 3.0);
    let delta = ((0.5 * PI) * g / (k + g)).sqrt().copysign(gamma1);
    let delta = if gamma1 == 0.0 { 0.0 } else { delta };
    let alpha = delta / (1.0 - delta * delta).sqrt();
    let omega = sigma / (1.0 - FRAC_2_PI * delta * delta).sqrt();
    let epsilon = mu - omega * delta * FRAC_2_PI.sqrt();
    Ok(SkewNormalParams {
        epsilon,
        omega,
        alpha,
        delta,
    })
}

/// `(2/ω) φ(z) Φ(αz)` with `z = (r - ε)/ω`.
pub fn pdf(p: &SkewNormalParams, r: f64) -> f64 {
    let z = (r - p.epsilon) / p.omega;
    2.0 / p.omega * std_normal_pdf(z) * std_normal_cdf(p.alpha * z)
}

/// Distribution function by quadrature of the density from the truncated
/// lower end of the support.
pub fn cdf(p: &SkewNormalParams, r: f64) -> Result<f64> {
    let (lo, hi) = p.support();
    if r <= lo {
        return Ok(0.0);
    }
    let upper = r.min(hi);
    let v = integrate(|x| pdf(p, x), lo, upper, CDF_TOL)?;
    Ok(v.clamp(0.0, 1.0))
}

/// Cumulative table of the distribution function for repeated evaluation.
///
/// Node values come from panel-wise quadrature of the density; an evaluation
/// adds one short quadrature from the nearest node below.
#[derive(Debug, Clone)]
pub struct CdfTable {
    params: SkewNormalParams,
    lo: f64,
    hi: f64,
    width: f64,
    nodes: Vec<f64>,
    tol: f64,
}

impl CdfTable {
    const PANELS: usize = 512;

    pub fn new(params: SkewNormalParams, tol: f64) -> Result<Self> {
        let (lo, hi) = params.support();
        let width = (hi - lo) / Self::PANELS as f64;
        let panel_tol = tol / Self::PANELS as f64;
        let mut nodes = Vec::with_capacity(Self::PANELS + 1);
        let mut acc = 0.0;
        nodes.push(0.0);
        for k in 0..Self::PANELS {
            let a = lo + k as f64 * width;
            let b = if k + 1 == Self::PANELS { hi } else { a + width };
            acc += integrate(|x| pdf(&params, x), a, b, panel_tol)?;
            nodes.push(acc);
        }
        Ok(Self {
            params,
            lo,
            hi,
            width,
            nodes,
            tol: panel_tol,
        })
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        if r <= self.lo {
            return Ok(0.0);
        }
        if r >= self.hi {
            return Ok(self.nodes[Self::PANELS].min(1.0));
        }
        let k = (((r - self.lo) / self.width) as usize).min(Self::PANELS - 1);
        let a = self.lo + k as f64 * self.width;
        let base = self.nodes[k];
        if r <= a {
            return Ok(base);
        }
        let p = self.params;
        Ok((base + integrate(|x| pdf(&p, x), a, r, self.tol)?).clamp(0.0, 1.0))
    }
}

/// Draws `n` variates as `ε + ω(δ|U₀| + sqrt(1-δ²) U₁)` with independent
/// standard normals `U₀, U₁`.
pub fn sample(p: &SkewNormalParams, n: usize, rng: &mut RngStream) -> Vec<f64> {
    (0..n).map(|_| draw(p, rng)).collect()
}

#[inline]
pub(crate) fn draw(p: &SkewNormalParams, rng: &mut RngStream) -> f64 {
    let u0 = rng.std_normal();
    let u1 = rng.std_normal();
    let z = p.delta * u0.abs() + (1.0 - p.delta * p.delta).sqrt() * u1;
    p.epsilon + p.omega * z
}

/// One row of the skewness sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewSweepRow {
    pub gamma1: f64,
    /// The Omega measure.
    pub omega_true: f64,
    /// `Ω - 2`, the quantity obtained with a `-1` constant in place of `+1`
    /// in the partial-moment identity.
    pub omega_paper: f64,
    pub sharpe: f64,
    pub method: OmegaMethod,
    pub error_estimate: f64,
}

/// Settings for [`sweep_skewness`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub mu: f64,
    pub sigma: f64,
    pub threshold: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub step: f64,
    pub method: OmegaMethod,
    pub tol: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            mu: 0.1,
            sigma: 0.3,
            threshold: 0.01,
            gamma_min: -0.99,
            gamma_max: 0.99,
            step: 0.01,
            method: OmegaMethod::Quadrature,
            tol: 1e-10,
            n_samples: omega::DEFAULT_MC_SAMPLES,
            seed: 0,
        }
    }
}

/// Skewness grid `gamma_min, gamma_min + step, ..., gamma_max`, rounded to
/// 12 decimals so that e.g. zero is hit exactly.
pub fn skewness_grid(gamma_min: f64, gamma_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    if !(gamma_min <= gamma_max)
        || gamma_min < -MAX_ABS_SKEWNESS
        || gamma_max > MAX_ABS_SKEWNESS
    {
        return Err(Error::InvalidArgument(format!(
            "skewness range [{gamma_min}, {gamma_max}] must be ordered within [-0.99, 0.99]"
        )));
    }
    let count = ((gamma_max - gamma_min) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|k| ((gamma_min + k as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

/// Omega of skew-normal returns with fixed mean and standard deviation over a
/// range of skewness. The Sharpe ratio `(μ - L)/σ` is the same on every row.
///
/// Rows are computed in parallel; Monte Carlo rows use seed `seed + row`.
pub fn sweep_skewness(cfg: &SweepConfig) -> Result<Vec<SkewSweepRow>> {
    let grid = skewness_grid(cfg.gamma_min, cfg.gamma_max, cfg.step)?;
    let sharpe = (cfg.mu - cfg.threshold) / cfg.sigma;
    grid.par_iter()
        .enumerate()
        .map(|(row, &gamma1)| {
            let params = from_moments(cfg.mu, cfg.sigma, gamma1)?;
            let dist = ReturnDistribution::SkewNormal(params);
            let est = omega::estimate(
                &dist,
                cfg.threshold,
                cfg.method,
                cfg.tol,
                cfg.n_samples,
                cfg.seed.wrapping_add(row as u64),
            )?;
            Ok(SkewSweepRow {
                gamma1,
                omega_true: est.value,
                omega_paper: est.value - 2.0,
                sharpe,
                method: cfg.method,
                error_estimate: est.error_estimate,
            })
        })
        .collect()
}

/// Writes sweep rows as CSV with header `gamma1,omega,omega_paper,sharpe`,
/// values to 10 significant digits.
pub fn write_sweep_csv<W: std::io::Write>(rows: &[SkewSweepRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "gamma1,omega,omega_paper,sharpe")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{}",
            sig10(r.gamma1),
            sig10(r.omega_true),
            sig10(r.omega_paper),
            sig10(r.sharpe)
        )?;
    }
    Ok(())
}

/// Formats with 10 significant digits, trimming trailing zeros.
pub fn sig10(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let s = format!("{:.9e}", x);
    let v: f64 = s.parse().expect("formatted float parses");
    let mag = v.abs().log10().floor() as i32;
    if (-5..15).contains(&mag) {
        let decimals = (9 - mag).max(0) as usize;
        let mut t = format!("{:.*}", decimals, v);
        if t.contains('.') {
            t = t.trim_end_matches('0').trim_end_matches('.').to_string();
        }
        if t == "-0" {
            t = "0".into();
        }
        t
    } else {
        let (mantissa, exp) = s.split_once('e').expect("exponent form");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exp}")
    }
}

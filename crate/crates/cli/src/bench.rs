//! SRAS against the projected-gradient QP on synthetic instances.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;
use sharpe_omega::numerics::inf_norm;
use sharpe_omega::{qpref, sharpe, sras, Result};

use crate::synthetic;

/// Weight gap above which the two solvers are reported as disagreeing.
pub const AGREEMENT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub instance: usize,
    pub sras_seconds: f64,
    pub sras_sharpe: f64,
    pub sras_iterations: usize,
    pub qp_seconds: f64,
    pub qp_sharpe: f64,
    pub qp_iterations: usize,
    /// `‖w_sras - w_qp‖∞`
    pub weight_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchSummary {
    pub rows: Vec<BenchRow>,
    pub mean_sras_seconds: f64,
    pub mean_qp_seconds: f64,
    /// `mean_qp_seconds / mean_sras_seconds`
    pub speedup: f64,
    pub max_weight_gap: f64,
    pub max_sharpe_gap: f64,
    pub all_agree: bool,
}

/// Solves `instances` synthetic problems of size `assets` with both solvers.
/// Instances are solved one after another so the timings do not interfere.
pub fn run(assets: usize, instances: usize, seed: u64, tol: f64, max_iter: usize) -> Result<BenchSummary> {
    let mut rows = Vec::with_capacity(instances);
    for k in 0..instances {
        let model = synthetic::instance(assets, seed, k as u64)?;

        let t = Instant::now();
        let s = sras::solve(&model, tol, max_iter)?;
        let sras_seconds = t.elapsed().as_secs_f64();

        let t = Instant::now();
        let q = qpref::solve_model(&model, tol, qpref::default_max_iter(assets))?;
        let qp_seconds = t.elapsed().as_secs_f64();

        let gap: Vec<f64> = s.weights.w.iter().zip(&q.weights.w).map(|(a, b)| a - b).collect();
        rows.push(BenchRow {
            instance: k,
            sras_seconds,
            sras_sharpe: s.sharpe,
            sras_iterations: s.iterations(),
            qp_seconds,
            qp_sharpe: sharpe::sharpe_ratio(&q.weights.w, &model)?,
            qp_iterations: q.iterations,
            weight_gap: inf_norm(&gap),
        });
    }
    let count = rows.len().max(1) as f64;
    let mean_sras_seconds = rows.iter().map(|r| r.sras_seconds).sum::<f64>() / count;
    let mean_qp_seconds = rows.iter().map(|r| r.qp_seconds).sum::<f64>() / count;
    let max_weight_gap = rows.iter().map(|r| r.weight_gap).fold(0.0, f64::max);
    let max_sharpe_gap = rows
        .iter()
        .map(|r| (r.sras_sharpe - r.qp_sharpe).abs())
        .fold(0.0, f64::max);
    Ok(BenchSummary {
        speedup: if mean_sras_seconds > 0.0 { mean_qp_seconds / mean_sras_seconds } else { f64::NAN },
        all_agree: max_weight_gap <= AGREEMENT_TOL,
        rows,
        mean_sras_seconds,
        mean_qp_seconds,
        max_weight_gap,
        max_sharpe_gap,
    })
}

/// Per-instance table (time and optimal Sharpe ratio for each solver) with a
/// closing row of means.
pub fn write_csv<W: Write>(summary: &BenchSummary, mut out: W) -> std::io::Result<()> {
    writeln!(out, "instance,sras_time_s,sras_sharpe,qp_time_s,qp_sharpe,weight_gap")?;
    for r in &summary.rows {
        writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:.6},{:.3e}",
            r.instance, r.sras_seconds, r.sras_sharpe, r.qp_seconds, r.qp_sharpe, r.weight_gap
        )?;
    }
    writeln!(out, "mean,{:.6},,{:.6},,", summary.mean_sras_seconds, summary.mean_qp_seconds)
}

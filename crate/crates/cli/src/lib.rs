//! Command-line front end: argument definitions and the subcommand runners.
//!
//! Every run produces a JSON report that echoes the effective options, so a
//! report is enough to reproduce the run. Failures are reported in the same
//! envelope under an `error` key and map to a nonzero exit code.

pub mod args;
pub mod bench;
pub mod synthetic;

use std::fs::File;
use std::io::BufWriter;

use serde_json::{json, Map, Value};
use sharpe_omega::market::{self, ExcessModel};
use sharpe_omega::omega::{self, ReturnDistribution};
use sharpe_omega::skewnorm::{self, SweepConfig};
use sharpe_omega::{qpref, sharpe, sras, Error, Result};

use args::{BenchArgs, Cli, Command, Dist, OmegaArgs, OptimizeArgs, OutputFormat, Solver, SweepArgs};

/// Exit status for a run that failed after argument parsing.
pub const EXIT_FAILURE: i32 = 1;

/// What a run prints and how it exits.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub exit_code: i32,
    pub report: Value,
}

pub fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Optimize(a) => finish("optimize", a.output, options(a), |opts| optimize(a, opts)),
        Command::Omega(a) => finish("omega", a.output, options(a), |_| omega_cmd(a)),
        Command::SweepSkew(a) => {
            let mut csv = Vec::new();
            let mut out = finish("sweep-skew", a.output, options(a), |_| sweep(a, &mut csv));
            if a.out.is_none() && out.exit_code == 0 {
                // The table owns stdout; the summary moves to stderr.
                out.stderr = std::mem::take(&mut out.stdout);
                out.stdout = String::from_utf8(csv).expect("csv output is utf-8");
            }
            out
        }
        Command::Bench(a) => {
            let mut table = Vec::new();
            let mut out = finish("bench", a.output, options(a), |opts| bench_cmd(a, opts, &mut table));
            if a.output == OutputFormat::Text && out.exit_code == 0 {
                out.stdout = String::from_utf8(table).expect("csv output is utf-8");
            }
            out
        }
    }
}

fn options<T: serde::Serialize>(args: &T) -> Map<String, Value> {
    match serde_json::to_value(args).expect("options serialize") {
        Value::Object(m) => m,
        _ => unreachable!("option structs serialize to objects"),
    }
}

fn finish(
    command: &str,
    format: OutputFormat,
    mut opts: Map<String, Value>,
    body: impl FnOnce(&mut Map<String, Value>) -> Result<Value>,
) -> Outcome {
    let result = body(&mut opts);
    let mut report = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "options": opts,
    });
    let exit_code = match result {
        Ok(v) => {
            report["result"] = v;
            0
        }
        Err(e) => {
            report["error"] = error_json(&e);
            EXIT_FAILURE
        }
    };
    let stdout = match format {
        OutputFormat::Json => format!("{}\n", serde_json::to_string_pretty(&report).expect("report serializes")),
        OutputFormat::Text => render_text(&report),
    };
    Outcome {
        stdout,
        stderr: String::new(),
        exit_code,
        report,
    }
}

fn error_json(e: &Error) -> Value {
    let mut v = json!({ "kind": e.kind(), "message": e.to_string() });
    if let Error::IterationLimit { best, .. } = e {
        v["best"] = json!(best);
    }
    v
}

fn render_text(report: &Value) -> String {
    let mut s = String::new();
    let section = |s: &mut String, title: &str, v: &Value| {
        if let Value::Object(m) = v {
            for (k, val) in m {
                s.push_str(&format!("{title}.{k}: {val}\n"));
            }
        }
    };
    s.push_str(&format!("command: {}\n", report["command"].as_str().unwrap_or_default()));
    section(&mut s, "options", &report["options"]);
    section(&mut s, "result", &report["result"]);
    section(&mut s, "error", &report["error"]);
    s
}

fn load_model(path: &std::path::Path, benchmark: f64) -> Result<ExcessModel> {
    let prices = market::load_prices(path)?;
    let moments = market::estimate_moments(&market::arithmetic_returns(&prices))?;
    Ok(market::excess_model(&moments, benchmark))
}

fn optimize(a: &OptimizeArgs, opts: &mut Map<String, Value>) -> Result<Value> {
    check_tol(a.tol)?;
    let model = load_model(&a.prices, a.benchmark)?;
    let n = model.n_assets();

    if a.allow_short {
        opts.insert("max_iter".into(), Value::Null);
        let w = sharpe::unconstrained_optimum(&model)?;
        let s = sharpe::sharpe_ratio(&w.w, &model)?;
        let grad = sharpe::sharpe_gradient(&w.w, &model)?;
        return Ok(json!({
            "solver": "closed-form",
            "labels": w.labels,
            "weights": w.w,
            "sharpe": s,
            "stationarity_residual": sharpe_omega::numerics::inf_norm(&grad),
            "iterations": 0,
        }));
    }

    let max_iter = a.max_iter.unwrap_or(match a.solver {
        Solver::Sras => sras::default_max_iter(n),
        Solver::Qp => qpref::default_max_iter(n),
    });
    opts.insert("max_iter".into(), json!(max_iter));

    match a.solver {
        Solver::Sras => {
            let sol = sras::solve(&model, a.tol, max_iter)?;
            let check = sras::verify_trace(&sol.trace, n);
            Ok(json!({
                "solver": "sras",
                "labels": sol.weights.labels,
                "weights": sol.weights.w,
                "sharpe": sol.sharpe,
                "kkt_max_violation": sol.kkt.max_violation,
                "iterations": sol.iterations(),
                "trace_verified": check.all_passed(),
            }))
        }
        Solver::Qp => {
            let sol = qpref::solve_model(&model, a.tol, max_iter)?;
            let s = sharpe::sharpe_ratio(&sol.weights.w, &model)?;
            let kkt = sharpe::kkt_report(&sol.weights.w, &model, sharpe::KKT_TOL)?;
            Ok(json!({
                "solver": "qp",
                "labels": sol.weights.labels,
                "weights": sol.weights.w,
                "sharpe": s,
                "kkt_max_violation": kkt.max_violation,
                "iterations": sol.iterations,
            }))
        }
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::Validation(format!("--tol must be positive, got {tol}")))
    }
}

fn omega_cmd(a: &OmegaArgs) -> Result<Value> {
    check_tol(a.tol)?;
    let dist = match a.dist {
        Dist::Normal => {
            if a.skew != 0.0 {
                return Err(Error::Validation("--skew applies to --dist skewnormal only".into()));
            }
            ReturnDistribution::normal(a.mean, a.stddev)?
        }
        Dist::Skewnormal => ReturnDistribution::SkewNormal(skewnorm::from_moments(a.mean, a.stddev, a.skew)?),
    };
    let est = omega::estimate(&dist, a.threshold, a.method, a.tol, a.samples, a.seed)?;
    Ok(json!({
        "omega": est.value,
        "method": est.method,
        "error_estimate": est.error_estimate,
        "sharpe": (a.mean - a.threshold) / a.stddev,
        "distribution": dist,
    }))
}

fn sweep(a: &SweepArgs, csv: &mut Vec<u8>) -> Result<Value> {
    check_tol(a.tol)?;
    let cfg = SweepConfig {
        mu: a.mean,
        sigma: a.stddev,
        threshold: a.threshold,
        gamma_min: a.gamma_min,
        gamma_max: a.gamma_max,
        step: a.step,
        method: a.method,
        tol: a.tol,
        n_samples: a.samples,
        seed: a.seed,
    };
    let rows = skewnorm::sweep_skewness(&cfg)?;
    match &a.out {
        Some(path) => skewnorm::write_sweep_csv(&rows, BufWriter::new(File::create(path)?))?,
        None => skewnorm::write_sweep_csv(&rows, &mut *csv)?,
    }
    let fold = |f: fn(f64, f64) -> f64, init: f64, get: fn(&skewnorm::SkewSweepRow) -> f64| {
        rows.iter().map(get).fold(init, f)
    };
    let sharpe_min = fold(f64::min, f64::INFINITY, |r| r.sharpe);
    let sharpe_max = fold(f64::max, f64::NEG_INFINITY, |r| r.sharpe);
    Ok(json!({
        "rows": rows.len(),
        "omega_min": fold(f64::min, f64::INFINITY, |r| r.omega_true),
        "omega_max": fold(f64::max, f64::NEG_INFINITY, |r| r.omega_true),
        "omega_paper_min": fold(f64::min, f64::INFINITY, |r| r.omega_paper),
        "omega_paper_max": fold(f64::max, f64::NEG_INFINITY, |r| r.omega_paper),
        "sharpe": if sharpe_min == sharpe_max { json!(sharpe_min) } else { json!([sharpe_min, sharpe_max]) },
        "max_error_estimate": fold(f64::max, 0.0, |r| r.error_estimate),
        "out": a.out,
    }))
}

fn bench_cmd(a: &BenchArgs, opts: &mut Map<String, Value>, table: &mut Vec<u8>) -> Result<Value> {
    check_tol(a.tol)?;
    if a.assets == 0 {
        return Err(Error::Validation("--assets must be at least 1".into()));
    }
    let max_iter = a.max_iter.unwrap_or(sras::default_max_iter(a.assets).max(1));
    opts.insert("max_iter".into(), json!(max_iter));
    let summary = bench::run(a.assets, a.instances, a.seed, a.tol, max_iter)?;
    bench::write_csv(&summary, &mut *table)?;
    if let Some(path) = &a.out {
        bench::write_csv(&summary, BufWriter::new(File::create(path)?))?;
    }
    let mut v = serde_json::to_value(&summary).expect("summary serializes");
    v["agreement_tol"] = json!(bench::AGREEMENT_TOL);
    v["out"] = json!(a.out);
    Ok(v)
}

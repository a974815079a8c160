//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};

/// Maximum recursion depth of the interval halving.
pub const MAX_DEPTH: u32 = 60;

/// Number of equal panels the interval is split into before adapting.
const INITIAL_PANELS: usize = 16;

/// Integrates `f` over `[a, b]` to an estimated absolute error of `tol`.
///
/// The interval is first cut into a few equal panels so narrow features in a
/// wide domain are not missed by the very first Simpson estimate; each panel
/// is then refined by recursive halving with Richardson extrapolation.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    integrate_with_error(f, a, b, tol).map(|(v, _)| v)
}

/// Like [`integrate`] but also returns the accumulated error estimate.
pub fn integrate_with_error<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "integration bounds must satisfy a < b, got [{a}, {b}]"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let h = (b - a) / INITIAL_PANELS as f64;
    let panel_tol = tol / INITIAL_PANELS as f64;
    let mut total = 0.0;
    let mut err = 0.0;
    let mut lo = a;
    let mut f_lo = f(lo);
    for k in 1..=INITIAL_PANELS {
        let hi = if k == INITIAL_PANELS { b } else { a + k as f64 * h };
        let f_hi = f(hi);
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        let whole = simpson(lo, hi, f_lo, f_mid, f_hi);
        let (v, e) = refine(&f, lo, hi, f_lo, f_mid, f_hi, whole, panel_tol, MAX_DEPTH)?;
        total += v;
        err += e;
        lo = hi;
        f_lo = f_hi;
    }
    Ok((total, err))
}

#[inline]
fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<(f64, f64)> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok((left + right + delta / 15.0, delta.abs() / 15.0));
    }
    if depth == 0 || m <= a || m >= b {
        return Err(Error::NoConvergence { a, b });
    }
    let (lv, le) = refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let (rv, re) = refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Ok((lv + rv, le + re))
}

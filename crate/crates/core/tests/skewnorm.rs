use sharpe_omega::numerics::RngStream;
use sharpe_omega::skewnorm::{cdf, from_moments, pdf, sample, CdfTable, SkewNormalParams};

const GAMMAS: [f64; 5] = [-0.9, -0.5, 0.0, 0.5, 0.9];

struct Moments {
    mean: f64,
    var: f64,
    m4: f64,
}

fn sample_moments(x: &[f64]) -> Moments {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let (mut s2, mut s4) = (0.0, 0.0);
    for v in x {
        let d = v - mean;
        s2 += d * d;
        s4 += d * d * d * d;
    }
    Moments {
        mean,
        var: s2 / (n - 1.0),
        m4: s4 / n,
    }
}

/// Mean and variance of `x` within four standard errors of `(mean, var)`.
fn check_moments(x: &[f64], mean: f64, var: f64, what: &str) {
    let n = x.len() as f64;
    let m = sample_moments(x);
    let se_mean = (m.var / n).sqrt();
    let se_var = ((m.m4 - m.var * m.var) / n).sqrt();
    assert!((m.mean - mean).abs() <= 4.0 * se_mean, "{what}: mean {} vs {mean}", m.mean);
    assert!((m.var - var).abs() <= 4.0 * se_var, "{what}: var {} vs {var}", m.var);
}

#[test]
fn analytic_moments_round_trip() {
    for g in GAMMAS {
        let p = from_moments(0.1, 0.3, g).unwrap();
        assert!((p.mean() - 0.1).abs() <= 1e-12);
        assert!((p.variance() - 0.09).abs() <= 1e-12);
        assert!((p.skewness() - g).abs() <= 1e-10);
    }
}

#[test]
fn sampled_moments_match() {
    for (i, g) in GAMMAS.into_iter().enumerate() {
        let p = from_moments(0.1, 0.3, g).unwrap();
        let x = sample(&p, 10_000_000, &mut RngStream::new(100 + i as u64));
        check_moments(&x, 0.1, 0.09, &format!("gamma {g}"));
    }
}

#[test]
fn affine_image_has_transformed_parameters() {
    let p = from_moments(0.05, 0.2, 0.6).unwrap();
    let (a, b) = (-0.3, 2.5);
    let q = SkewNormalParams::new(a + b * p.epsilon, b * p.omega, p.alpha).unwrap();
    let x: Vec<f64> = sample(&p, 1_000_000, &mut RngStream::new(5))
        .into_iter()
        .map(|v| a + b * v)
        .collect();
    check_moments(&x, q.mean(), q.variance(), "affine image");
    assert!((q.skewness() - p.skewness()).abs() <= 1e-12);
}

#[test]
fn pdf_nonnegative_and_cdf_monotone() {
    for g in GAMMAS {
        let p = from_moments(0.1, 0.3, g).unwrap();
        let (lo, hi) = p.support();
        let table = CdfTable::new(p, 1e-12).unwrap();
        let mut prev = 0.0;
        for k in 0..=1000 {
            let r = lo - 0.1 + (hi - lo + 0.2) * k as f64 / 1000.0;
            assert!(pdf(&p, r) >= 0.0);
            let f = table.eval(r).unwrap();
            assert!(f >= prev - 1e-15, "cdf decreased at {r}");
            prev = f;
        }
        assert!((prev - 1.0).abs() <= 1e-10);
        assert!((cdf(&p, p.mean()).unwrap() - table.eval(p.mean()).unwrap()).abs() <= 1e-11);
    }
}

#[test]
fn samples_within_the_dkw_band() {
    // P(sup |F_n - F| > ε) ≤ 2 exp(-2nε²); ε below gives a 1e-9 false-alarm rate.
    let n = 200_000;
    let eps = ((2.0f64 / 1e-9).ln() / (2.0 * n as f64)).sqrt();
    for (i, g) in [-0.9, 0.0, 0.9].into_iter().enumerate() {
        let p = from_moments(0.1, 0.3, g).unwrap();
        let table = CdfTable::new(p, 1e-12).unwrap();
        let mut x = sample(&p, n, &mut RngStream::new(40 + i as u64));
        x.sort_by(f64::total_cmp);
        let mut worst = 0.0_f64;
        for (k, v) in x.iter().enumerate() {
            let f = table.eval(*v).unwrap();
            worst = worst.max((f - k as f64 / n as f64).abs()).max((f - (k + 1) as f64 / n as f64).abs());
        }
        assert!(worst <= eps, "gamma {g}: sup distance {worst} > {eps}");
    }
}

use proptest::prelude::*;
use sharpe_omega::omega::{
    estimate, lower_cdf_area, lower_partial_moment, omega_cdf_ratio, omega_elliptical_normal,
    omega_monte_carlo, omega_partial_moment, upper_partial_moment, upper_survival_area,
    OmegaMethod, ReturnDistribution,
};
use sharpe_omega::skewnorm::from_moments;

const TOL: f64 = 1e-10;

fn distribution() -> impl Strategy<Value = ReturnDistribution> {
    (any::<bool>(), -0.2..0.3f64, 0.05..0.6f64, -0.95..0.95f64).prop_map(|(skew, mu, sd, g)| {
        if skew {
            ReturnDistribution::SkewNormal(from_moments(mu, sd, g).unwrap())
        } else {
            ReturnDistribution::normal(mu, sd).unwrap()
        }
    })
}

/// A distribution with a threshold inside `mean ± 2 sd`.
fn dist_and_threshold() -> impl Strategy<Value = (ReturnDistribution, f64)> {
    (distribution(), -2.0..2.0f64).prop_map(|(d, k)| {
        let l = d.mean() + k * d.std_dev();
        (d, l)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fubini_identity((d, l) in dist_and_threshold()) {
        let (survival, _) = upper_survival_area(&d, l, TOL).unwrap();
        let (upm, _) = upper_partial_moment(&d, l, TOL).unwrap();
        prop_assert!((survival - upm).abs() <= 1e-8, "{survival} vs {upm}");
        let (below, _) = lower_cdf_area(&d, l, TOL).unwrap();
        let (lpm, _) = lower_partial_moment(&d, l, TOL).unwrap();
        prop_assert!((below - lpm).abs() <= 1e-8, "{below} vs {lpm}");
        // E[(R-L)⁺] - E[(L-R)⁺] = E[R] - L
        prop_assert!((upm - lpm - (d.mean() - l)).abs() <= 1e-8);
    }

    #[test]
    fn ratio_and_identity_agree((d, l) in dist_and_threshold()) {
        let a = omega_cdf_ratio(&d, l, TOL).unwrap();
        let b = omega_partial_moment(&d, l, TOL).unwrap();
        prop_assert!((a.value - b.value).abs() <= 1e-6, "{} vs {}", a.value, b.value);
    }

    #[test]
    fn decreasing_in_the_threshold(d in distribution()) {
        let (mu, sd) = (d.mean(), d.std_dev());
        let mut prev = f64::INFINITY;
        for k in 0..20 {
            let l = mu - 2.0 * sd + 4.0 * sd * k as f64 / 19.0;
            let w = omega_partial_moment(&d, l, TOL).unwrap().value;
            prop_assert!(w < prev, "not decreasing at L = {l}");
            prev = w;
        }
    }

    #[test]
    fn normal_closed_form_matches_quadrature(mu in -0.2..0.3f64, sd in 0.05..0.6f64, k in -2.0..2.0f64) {
        let d = ReturnDistribution::normal(mu, sd).unwrap();
        let l = mu + k * sd;
        let exact = omega_elliptical_normal(mu, sd, l).value;
        let q = omega_cdf_ratio(&d, l, TOL).unwrap().value;
        prop_assert!((exact - q).abs() <= 1e-7 * exact.max(1.0));
    }
}

#[test]
fn unit_omega_at_the_mean() {
    for (mu, sd) in [(0.1, 0.3), (-0.05, 0.02), (0.0, 1.0)] {
        let d = ReturnDistribution::normal(mu, sd).unwrap();
        for m in [OmegaMethod::Quadrature, OmegaMethod::PartialMoment, OmegaMethod::ClosedForm] {
            let w = estimate(&d, mu, m, TOL, 0, 0).unwrap().value;
            assert!((w - 1.0).abs() <= 1e-9, "{m:?}: {w}");
        }
    }
}

#[test]
fn monte_carlo_within_four_standard_errors() {
    let cases = [
        ReturnDistribution::normal(0.1, 0.3).unwrap(),
        ReturnDistribution::SkewNormal(from_moments(0.1, 0.3, -0.7).unwrap()),
        ReturnDistribution::SkewNormal(from_moments(0.05, 0.2, 0.9).unwrap()),
    ];
    for (i, d) in cases.iter().enumerate() {
        let q = omega_cdf_ratio(d, 0.01, TOL).unwrap().value;
        let mc = omega_monte_carlo(d, 0.01, 1_000_000, 7 + i as u64).unwrap();
        assert!(
            (mc.value - q).abs() <= 4.0 * mc.error_estimate,
            "{}: {} vs {} (se {})",
            i,
            mc.value,
            q,
            mc.error_estimate
        );
    }
}

#[test]
fn monte_carlo_is_reproducible() {
    let d = ReturnDistribution::SkewNormal(from_moments(0.1, 0.3, 0.4).unwrap());
    let a = omega_monte_carlo(&d, 0.01, 250_000, 11).unwrap();
    let b = omega_monte_carlo(&d, 0.01, 250_000, 11).unwrap();
    assert_eq!(a, b);
    let c = omega_monte_carlo(&d, 0.01, 250_000, 12).unwrap();
    assert_ne!(a.value, c.value);
}

mod common;

use proptest::prelude::*;
use sharpe_omega::numerics::{
    cholesky, integrate, sample_std_normals, solve_pd, std_normal_cdf, RngStream, SymMatrix,
};

use common::{max_abs_diff, pd_matrix};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn cholesky_reconstructs(s in pd_matrix(1, 50)) {
        let l = cholesky(&s).unwrap();
        let r = l.reconstruct();
        let diff: f64 = r.as_slice().iter().zip(s.as_slice()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        prop_assert!(diff <= 1e-10 * s.frobenius_norm(), "{diff}");
    }

    #[test]
    fn solve_round_trip(
        (s, y) in pd_matrix(1, 50).prop_flat_map(|s| {
            let n = s.dim();
            (Just(s), prop::collection::vec(-10.0..10.0f64, n))
        })
    ) {
        let b = s.mul_vec(&y);
        let x = solve_pd(&s, &b).unwrap();
        prop_assert!(max_abs_diff(&x, &y) <= 1e-8);
    }

    #[test]
    fn phi_symmetric_and_monotone(x in -40.0..40.0f64, dx in 0.0..1.0f64) {
        prop_assert!((std_normal_cdf(x) + std_normal_cdf(-x) - 1.0).abs() <= 1e-12);
        prop_assert!(std_normal_cdf(x + dx) >= std_normal_cdf(x));
    }

    #[test]
    fn simpson_exact_on_cubics(
        c in prop::array::uniform4(-5.0..5.0f64),
        a in -3.0..3.0f64,
        len in 0.1..4.0f64,
    ) {
        let b = a + len;
        let f = |x: f64| c[0] + c[1] * x + c[2] * x * x + c[3] * x * x * x;
        let anti = |x: f64| c[0] * x + c[1] * x * x / 2.0 + c[2] * x.powi(3) / 3.0 + c[3] * x.powi(4) / 4.0;
        let want = anti(b) - anti(a);
        let got = integrate(f, a, b, 1e-10).unwrap();
        prop_assert!((got - want).abs() <= 1e-10 * want.abs().max(1.0), "{got} vs {want}");
    }

    #[test]
    fn rng_is_reproducible(seed in any::<u64>(), n in 0usize..2000) {
        let a = sample_std_normals(&mut RngStream::new(seed), n);
        let b = sample_std_normals(&mut RngStream::new(seed), n);
        prop_assert_eq!(a, b);
    }
}

#[test]
fn rejects_indefinite_matrix() {
    let s = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
    assert!(cholesky(&s).is_err());
}

mod common;

use proptest::prelude::*;
use sharpe_omega::market::ExcessModel;
use sharpe_omega::numerics::{dot, solve_pd};
use sharpe_omega::qpref::{self, project, QpInstance};
use sharpe_omega::sharpe::{sharpe_ratio, unconstrained_optimum};
use sharpe_omega::sras::{self, default_max_iter, verify_trace};

use common::{max_abs_diff, model};

fn sras_solve(m: &ExcessModel) -> sras::SrasSolution {
    sras::solve(m, 1e-8, default_max_iter(m.n_assets())).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn sras_matches_the_qp_reformulation(m in model(2, 50)) {
        let s = sras_solve(&m);
        let q = qpref::solve_model(&m, qpref::STEP_RTOL, qpref::default_max_iter(m.n_assets())).unwrap();
        prop_assert!(max_abs_diff(&s.weights.w, &q.weights.w) <= 1e-6);
        prop_assert!(s.kkt.max_violation <= 1e-8, "kkt {}", s.kkt.max_violation);
    }

    #[test]
    fn sras_traces_verify(m in model(1, 20)) {
        let s = sras_solve(&m);
        let v = verify_trace(&s.trace, m.n_assets());
        prop_assert!(v.all_passed(), "{:?}", v.failures);
        prop_assert!(s.iterations() <= default_max_iter(m.n_assets()));
    }

    #[test]
    fn sras_final_value_is_the_active_set_bound(m in model(1, 20)) {
        let s = sras_solve(&m);
        let p: Vec<usize> = (0..m.n_assets()).filter(|&j| s.weights.w[j] > 0.0).collect();
        let sub = m.sigma.principal(&p);
        let ep: Vec<f64> = p.iter().map(|&j| m.e[j]).collect();
        let bound = dot(&ep, &solve_pd(&sub, &ep).unwrap()).sqrt();
        prop_assert!((s.sharpe - bound).abs() <= 1e-10 * bound.max(1.0));
    }

    #[test]
    fn sras_equals_tangency_when_it_is_long_only(m in model(1, 12)) {
        let x = solve_pd(&m.sigma, &m.e).unwrap();
        prop_assume!(x.iter().all(|&v| v >= 0.0));
        let s = sras_solve(&m);
        let t = unconstrained_optimum(&m).unwrap();
        prop_assert!(max_abs_diff(&s.weights.w, &t.w) <= 1e-8);
    }

    #[test]
    fn sras_agrees_with_the_grid_oracle(m in model(2, 3)) {
        let step = 0.01;
        let s = sras_solve(&m);
        let g = qpref::grid_oracle(&m, step).unwrap();
        let sg = sharpe_ratio(&g.w, &m).unwrap();
        prop_assert!(sg <= s.sharpe + 1e-12);
        prop_assert!(max_abs_diff(&s.weights.w, &g.w) <= step + 1e-12,
            "sras {:?} grid {:?}", s.weights.w, g.w);
    }

    #[test]
    fn qp_iterates_descend_and_stay_feasible(m in model(2, 20)) {
        let inst = QpInstance::from_model(&m).unwrap();
        let q = qpref::solve_qp(&inst, qpref::STEP_RTOL, qpref::default_max_iter(m.n_assets())).unwrap();
        for pair in q.objective_history.windows(2) {
            prop_assert!(pair[1] <= pair[0] + 1e-12 * pair[0].abs().max(1.0));
        }
        prop_assert!(q.max_constraint_error <= 1e-10 * inst.z.max(1.0));
        prop_assert!(q.raw.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn qp_output_ignores_the_scale_of_z(m in model(2, 10)) {
        let inst = QpInstance::from_model(&m).unwrap();
        let big = QpInstance::new(inst.sigma.clone(), inst.e.clone(), 10.0 * inst.z).unwrap();
        let a = qpref::solve_qp(&inst, qpref::STEP_RTOL, qpref::default_max_iter(10)).unwrap();
        let b = qpref::solve_qp(&big, qpref::STEP_RTOL, qpref::default_max_iter(10)).unwrap();
        prop_assert!(max_abs_diff(&a.weights.w, &b.weights.w) <= 1e-8, "{:?} vs {:?}", a.weights.w, b.weights.w);
    }

    #[test]
    fn projection_is_optimal_and_idempotent(
        (v, e, z, probes) in (1usize..12).prop_flat_map(|n| (
            prop::collection::vec(-5.0..5.0f64, n),
            prop::collection::vec(-1.0..1.0f64, n),
            0.01..5.0f64,
            prop::collection::vec(prop::collection::vec(0.0..1.0f64, n), 1000),
        ))
    ) {
        prop_assume!(e.iter().any(|&x| x > 1e-3));
        let p = project(&v, &e, z).unwrap();
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        prop_assert!((dot(&p, &e) - z).abs() <= 1e-10);
        let pp = project(&p, &e, z).unwrap();
        prop_assert!(max_abs_diff(&p, &pp) <= 1e-12 * p.iter().fold(1.0_f64, |a, b| a.max(b.abs())));

        let dist = |w: &[f64]| w.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let dp = dist(&p);
        for r in &probes {
            // Scale a nonnegative probe onto the constraint when possible.
            let t = dot(r, &e);
            if t <= 1e-9 { continue; }
            let w: Vec<f64> = r.iter().map(|x| x * z / t).collect();
            prop_assert!(dp <= dist(&w) + 1e-9 * dp.max(1.0));
        }
    }
}

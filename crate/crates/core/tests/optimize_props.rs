mod common;

use common::{interior, log_returns, with_zeros};
use egr::egr::egr_log;
use egr::info::relative_entropy;
use egr::optimize::{
    constrained_joint, eta_bar, expected_egr, max_egr, maximize_expected_egr, penalized_joint, phi_eta,
    quadratic_approx_objective, quadratic_approx_solution, relative_growth_bound_check, solve_expected_egr,
    supergradient, tilt_divergence, variational_max, variational_objective, wealth_ratio_certificate, DualBranch,
    ExpectedEgrOptions, ScenarioSet,
};
use egr::Weights;
use proptest::prelude::*;

fn scenarios(n: usize, k: usize) -> impl Strategy<Value = ScenarioSet> {
    prop::collection::vec(prop::collection::vec(-0.5f64..0.5, n), k)
        .prop_map(|rows| ScenarioSet::new(rows, None).unwrap())
}

proptest! {
    #[test]
    fn variational_value_dominates((pi, r, p) in (1usize..7).prop_flat_map(|n| (with_zeros(n), log_returns(n), with_zeros(n)))) {
        let (v, p_star) = variational_max(&pi, &r).unwrap();
        prop_assert!((variational_objective(&pi, &r, &p_star).unwrap() - v).abs() <= 1e-12);
        prop_assert!(variational_objective(&pi, &r, &p).unwrap() <= v + 1e-12);
    }

    #[test]
    fn max_egr_beats_every_portfolio((r, pi) in (2usize..7).prop_flat_map(|n| (log_returns(n), with_zeros(n)))) {
        let best = max_egr(&r).unwrap();
        prop_assert!(egr_log(&pi, &r).unwrap() <= best.value + 1e-12);
        prop_assert!((egr_log(&best.pi_star, &r).unwrap() - best.value).abs() <= 1e-12);
        prop_assert!(best.pi_star.support().len() <= 2);
    }

    #[test]
    fn max_egr_is_shift_and_permutation_invariant(
        (r, perm) in (2usize..7).prop_flat_map(|n| (log_returns(n), Just((0..n).collect::<Vec<_>>()).prop_shuffle())),
        c in -3.0f64..3.0,
    ) {
        let base = max_egr(&r).unwrap().value;
        let shifted: Vec<f64> = r.iter().map(|x| x + c).collect();
        prop_assert!((max_egr(&shifted).unwrap().value - base).abs() <= 1e-12);
        let permuted: Vec<f64> = perm.iter().map(|&i| r[i]).collect();
        prop_assert_eq!(max_egr(&permuted).unwrap().value, base);
    }

    #[test]
    fn penalized_scales_like_a_perspective(r in (2usize..6).prop_flat_map(log_returns), lambda in 0.1f64..5.0) {
        let res = penalized_joint(&r, lambda).unwrap();
        let scaled: Vec<f64> = r.iter().map(|x| x / lambda).collect();
        prop_assert!((res.value - lambda * max_egr(&scaled).unwrap().value).abs() <= 1e-12);
        prop_assert!(res.kkt_residual <= 1e-10);
    }

    #[test]
    fn phi_eta_solves_the_constraint((pi, r) in (2usize..6).prop_flat_map(|n| (interior(n), log_returns(n))), frac in 0.01f64..0.99) {
        let bar = eta_bar(&pi, &r).unwrap();
        let eta = frac * bar;
        let res = phi_eta(&pi, &r, eta).unwrap();
        prop_assume!(res.branch == DualBranch::Interior);
        let (h, q) = tilt_divergence(&pi, &r, res.lambda_star).unwrap();
        prop_assert!((h - eta).abs() <= 1e-10);
        prop_assert!((relative_entropy(&q, &pi).unwrap() - eta).abs() <= 1e-9);
        // strong duality: value = λ* (η + γ(π, r/λ*))
        let scaled: Vec<f64> = r.iter().map(|x| x / res.lambda_star).collect();
        let dual = res.lambda_star * (eta + egr_log(&pi, &scaled).unwrap());
        prop_assert!((dual - res.value).abs() <= 1e-8 * (1.0 + res.value.abs()));
    }

    #[test]
    fn phi_eta_is_monotone_and_concave_in_radius((pi, r) in (2usize..5).prop_flat_map(|n| (interior(n), log_returns(n)))) {
        let bar = eta_bar(&pi, &r).unwrap();
        let etas: Vec<f64> = (0..=8).map(|k| bar * k as f64 / 8.0).collect();
        let vals: Vec<f64> = etas.iter().map(|&e| phi_eta(&pi, &r, e).unwrap().value).collect();
        for w in vals.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-10);
        }
        for w in vals.windows(3) {
            prop_assert!(w[1] >= 0.5 * (w[0] + w[2]) - 1e-8);
        }
    }

    #[test]
    fn constrained_joint_is_monotone(r in (2usize..6).prop_flat_map(log_returns)) {
        let mut prev = 0.0;
        for k in 0..12 {
            let eta = 0.05 * k as f64;
            let res = constrained_joint(&r, eta).unwrap();
            prop_assert!(res.value >= prev - 1e-12);
            prop_assert!(relative_entropy(&res.q_star, &res.pi_star).unwrap() <= eta + 1e-9);
            prev = res.value;
        }
    }

    #[test]
    fn expected_egr_certificate_bounds_the_gap(s in scenarios(3, 5), pi in interior(3)) {
        let res = solve_expected_egr(&s, ExpectedEgrOptions { tol: 1e-7, ..Default::default() }).unwrap();
        prop_assert!(res.converged);
        prop_assert!(expected_egr(&pi, &s).unwrap() <= res.value + 1e-6);
        let (lhs, rhs) = relative_growth_bound_check(&pi, &res.pi_star, &s).unwrap();
        prop_assert!(lhs <= rhs + 1e-6);
    }

    #[test]
    fn supergradient_matches_finite_differences(s in scenarios(3, 4), pi in interior(3)) {
        let g = supergradient(&pi, &s).unwrap();
        let h = 1e-6;
        // directional derivative along e_i − e_j stays on the simplex
        for (i, j) in [(0, 1), (1, 2), (0, 2)] {
            let step = |t: f64| {
                let mut w = pi.to_vec();
                w[i] += t;
                w[j] -= t;
                Weights::new(w).unwrap()
            };
            let fd = (expected_egr(&step(h), &s).unwrap() - expected_egr(&step(-h), &s).unwrap()) / (2.0 * h);
            prop_assert!((fd - (g[i] - g[j])).abs() <= 1e-6);
        }
    }

    #[test]
    fn tilt_divergence_grows_as_lambda_shrinks((pi, r) in (2usize..6).prop_flat_map(|n| (interior(n), log_returns(n)))) {
        let mut prev = 0.0;
        for k in 0..30 {
            let lambda = 10f64.powf(1.5 - 0.1 * k as f64);
            let (h, _) = tilt_divergence(&pi, &r, lambda).unwrap();
            prop_assert!(h >= prev - 1e-12);
            prev = h;
        }
    }

    #[test]
    fn free_reference_beats_any_fixed_reference((pi, r) in (2usize..5).prop_flat_map(|n| (with_zeros(n), log_returns(n))), eta in 0.0f64..1.0) {
        let fixed = phi_eta(&pi, &r, eta).unwrap().value;
        let free = constrained_joint(&r, eta).unwrap().value;
        prop_assert!(free >= fixed - 1e-9);
    }

    #[test]
    fn penalized_pair_dominates_random_pairs(
        r in log_returns(3),
        pairs in prop::collection::vec((interior(3), interior(3)), 50),
    ) {
        let lambda = 0.7;
        let res = penalized_joint(&r, lambda).unwrap();
        let obj = |p: &Weights, q: &Weights| {
            let lin: f64 = (0..3).map(|i| (q[i] - p[i]) * r[i]).sum();
            lin - lambda * relative_entropy(q, p).unwrap()
        };
        prop_assert!((obj(&res.pi_star, &res.q_star) - res.value).abs() <= 1e-10);
        for (p, q) in &pairs {
            prop_assert!(obj(p, q) <= res.value + 1e-12);
        }
    }

    #[test]
    fn certificate_bounds_every_grid_point(s in scenarios(2, 4)) {
        let res = maximize_expected_egr(&s, 1e-6).unwrap();
        let slack = res.certificate.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for k in 0..=200 {
            let t = k as f64 / 200.0;
            let p = Weights::new(vec![t, 1.0 - t]).unwrap();
            prop_assert!(expected_egr(&p, &s).unwrap() <= res.value + slack.max(0.0) + 1e-14);
        }
        let c = wealth_ratio_certificate(&res.pi_star, &s).unwrap();
        prop_assert_eq!(c, res.certificate);
    }

    #[test]
    fn constant_mean_optimum_is_growth_optimal(raw in prop::collection::vec(prop::collection::vec(-0.4f64..0.4, 3), 4)) {
        // remove each asset's mean so that m = 0
        let mut rows = raw.clone();
        for i in 0..3 {
            let m: f64 = raw.iter().map(|r| r[i]).sum::<f64>() / raw.len() as f64;
            for r in rows.iter_mut() {
                r[i] -= m;
            }
        }
        let s = ScenarioSet::new(rows, None).unwrap();
        let res = maximize_expected_egr(&s, 1e-8).unwrap();
        for j in 0..3 {
            let ratio: f64 = s.scenarios().iter().map(|r| {
                let lw = egr::numeric::weighted_log_sum_exp(&res.pi_star, r);
                (r[j] - lw).exp() / s.len() as f64
            }).sum();
            prop_assert!(ratio <= 1.0 + 1e-7);
        }
        let (lhs, rhs) = relative_growth_bound_check(&Weights::barycenter(3).unwrap(), &res.pi_star, &s).unwrap();
        prop_assert!(rhs.abs() <= 1e-15);
        prop_assert!(lhs <= 1e-7);
    }

    #[test]
    fn quadratic_solution_dominates_and_tracks_small_returns(s in scenarios(3, 5), pts in prop::collection::vec(interior(3), 50)) {
        let q = quadratic_approx_solution(&s).unwrap();
        let best = quadratic_approx_objective(&q, &s).unwrap();
        for p in &pts {
            prop_assert!(quadratic_approx_objective(p, &s).unwrap() <= best + 1e-10);
        }
        let small = s.scaled(1e-2);
        let exact = maximize_expected_egr(&small, 1e-12).unwrap().pi_star;
        let approx = quadratic_approx_solution(&small).unwrap();
        let tv: f64 = 0.5 * exact.iter().zip(approx.iter()).map(|(a, b)| (a - b).abs()).sum::<f64>();
        prop_assert!(tv <= 1e-2, "tv {}", tv);
    }
}

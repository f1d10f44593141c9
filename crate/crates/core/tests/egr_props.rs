mod common;

use common::{close, gross, interior, log_returns, with_zeros};
use egr::egr::{
    campbell_length, chain_decompose, egr, egr_div, egr_log, egr_quadratic_approx, free_energy, shannon_length,
    CodeSpec, EnergySpec,
};
use egr::info::{egr_divergence_identity, egr_identity_lhs_rhs, egr_identity_ominus, relative_entropy};
use egr::simplex::{closure, composite, normalize};
use egr::{CompositeSpec, Weights};
use proptest::prelude::*;

fn am_gm(pi: &Weights, r: &[f64]) -> (f64, f64) {
    let am: f64 = pi.iter().zip(r).map(|(p, x)| p * x).sum();
    let gm: f64 = pi
        .iter()
        .zip(r)
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, x)| x.powf(*p))
        .product();
    (am, gm)
}

proptest! {
    #[test]
    fn exp_gamma_is_am_over_gm((pi, r) in (1usize..9).prop_flat_map(|n| (with_zeros(n), gross(n)))) {
        let (am, gm) = am_gm(&pi, &r);
        let g = egr(&pi, &r).unwrap();
        prop_assert!(g >= 0.0);
        prop_assert!((g.exp() * gm - am).abs() / am <= 1e-12);
    }

    #[test]
    fn gamma_invariances(
        (pi, r, perm) in (1usize..8).prop_flat_map(|n| {
            (with_zeros(n), gross(n), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
        }),
        a in 0.01f64..100.0,
        junk in 0.1f64..10.0,
    ) {
        let g = egr(&pi, &r).unwrap();
        let pi_p = Weights::new(perm.iter().map(|&i| pi[i]).collect()).unwrap();
        let r_p: Vec<f64> = perm.iter().map(|&i| r[i]).collect();
        prop_assert!(close(egr(&pi_p, &r_p).unwrap(), g, 1e-12));
        let scaled: Vec<f64> = r.iter().map(|x| a * x).collect();
        prop_assert!(close(egr(&pi, &scaled).unwrap(), g, 1e-12));
        // off-support entries do not matter, including zeros
        let mut off = r.clone();
        for i in 0..off.len() {
            if pi[i] == 0.0 {
                off[i] = if i % 2 == 0 { 0.0 } else { junk };
            }
        }
        prop_assert_eq!(egr(&pi, &off).unwrap(), g);
        // closure of R leaves Γ unchanged
        prop_assert!(close(egr(&pi, &closure(&r, &pi).unwrap()).unwrap(), g, 1e-12));
    }

    #[test]
    fn gamma_vanishes_exactly_on_constants((pi, c) in (1usize..8).prop_flat_map(|n| (with_zeros(n), 0.01f64..100.0))) {
        let mut r = vec![c; pi.len()];
        prop_assert_eq!(egr(&pi, &r).unwrap(), 0.0);
        if pi.support().len() >= 2 {
            r[pi.support()[0]] = 2.0 * c;
            prop_assert!(egr(&pi, &r).unwrap() > 0.0);
        }
    }

    #[test]
    fn gamma_is_concave_in_pi(
        (p, q, r) in (2usize..7).prop_flat_map(|n| (interior(n), interior(n), gross(n))),
        t in 0.0f64..1.0,
    ) {
        let mix = normalize(&p.iter().zip(q.iter()).map(|(a, b)| t * a + (1.0 - t) * b).collect::<Vec<_>>()).unwrap();
        let lhs = egr(&mix, &r).unwrap();
        let rhs = t * egr(&p, &r).unwrap() + (1.0 - t) * egr(&q, &r).unwrap();
        prop_assert!(lhs >= rhs - 1e-12);
    }

    #[test]
    fn gamma_is_affine_on_constant_mean_sets(
        (pi, r, v) in (3usize..7).prop_flat_map(|n| (interior(n), gross(n), prop::collection::vec(-1.0f64..1.0, n))),
        s in 0.1f64..0.9,
    ) {
        // direction orthogonal to both 1 and R
        let n = pi.len() as f64;
        let ones = vec![1.0 / n.sqrt(); pi.len()];
        let proj = |x: &[f64], u: &[f64]| -> Vec<f64> {
            let d: f64 = x.iter().zip(u).map(|(a, b)| a * b).sum();
            x.iter().zip(u).map(|(a, b)| a - d * b).collect()
        };
        let r_perp = proj(&r, &ones);
        let rn: f64 = r_perp.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assume!(rn > 1e-6);
        let r_unit: Vec<f64> = r_perp.iter().map(|x| x / rn).collect();
        // project twice so rounding leaves no drift along 1 or R
        let once = proj(&proj(&v, &ones), &r_unit);
        let d = proj(&proj(&once, &ones), &r_unit);
        let scale = d.iter().zip(pi.iter()).map(|(di, p)| di.abs() / p).fold(0.0, f64::max);
        prop_assume!(scale > 1e-3);
        let h = 0.9 / scale;
        let at = |x: f64| Weights::new(pi.iter().zip(&d).map(|(p, di)| p + x * h * di).collect()).unwrap();
        let (a, b) = (at(-1.0), at(1.0));
        let mid = at(2.0 * s - 1.0);
        let ga = egr(&a, &r).unwrap();
        let gb = egr(&b, &r).unwrap();
        let gm = egr(&mid, &r).unwrap();
        prop_assert!((gm - ((1.0 - s) * ga + s * gb)).abs() <= 1e-10);
    }

    #[test]
    fn general_chain_rule(
        (outer, blocks, rets, scale) in (1usize..5).prop_flat_map(|n| {
            let blocks = prop::collection::vec((1usize..5).prop_flat_map(|k| (with_zeros(k), gross(k))), n);
            (with_zeros(n), blocks, prop::collection::vec(0.1f64..10.0, n)).prop_map(|(o, b, a)| {
                let (bl, rs): (Vec<_>, Vec<_>) = b.into_iter().unzip();
                (o, bl, rs, a)
            })
        }),
    ) {
        let spec = CompositeSpec::new(outer.clone(), blocks, Some(scale)).unwrap();
        let dec = chain_decompose(&spec, &rets).unwrap();
        prop_assert!(dec.residual(&outer).abs() <= 1e-12);
    }

    #[test]
    fn relative_entropy_identities((pi, r, q) in (1usize..7).prop_flat_map(|n| (interior(n), interior(n), interior(n)))) {
        let (a, b) = egr_identity_lhs_rhs(&pi, &r).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
        let (a, b) = egr_identity_ominus(&pi, &r).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
        let (a, b) = egr_divergence_identity(&pi, &q, &r).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn relative_entropy_chain_rule(
        (p, q, mus, nus) in (1usize..4).prop_flat_map(|n| {
            let pairs = prop::collection::vec((1usize..4).prop_flat_map(|k| (interior(k), interior(k))), n);
            (interior(n), interior(n), pairs).prop_map(|(p, q, pairs)| {
                let (m, v): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
                (p, q, m, v)
            })
        }),
    ) {
        let pm = composite(&CompositeSpec::new(p.clone(), mus.clone(), None).unwrap()).unwrap();
        let qn = composite(&CompositeSpec::new(q.clone(), nus.clone(), None).unwrap()).unwrap();
        let lhs = relative_entropy(&pm, &qn).unwrap();
        let inner: f64 = (0..p.len()).map(|i| p[i] * relative_entropy(&mus[i], &nus[i]).unwrap()).sum();
        let rhs = relative_entropy(&p, &q).unwrap() + inner;
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn divergence_form_is_numeraire_free((pi, y, x) in (1usize..7).prop_flat_map(|n| (with_zeros(n), gross(n), gross(n))), a in 0.1f64..10.0) {
        let g = egr_div(&pi, &y, &x).unwrap();
        let ay: Vec<f64> = y.iter().map(|v| a * v).collect();
        prop_assert!(close(egr_div(&pi, &ay, &x).unwrap(), g, 1e-12));
        prop_assert_eq!(egr_div(&pi, &x, &x).unwrap(), 0.0);
    }

    #[test]
    fn free_energy_identity((pi, e) in (1usize..8).prop_flat_map(|n| (with_zeros(n), log_returns(n))), beta in 0.1f64..10.0) {
        let spec = EnergySpec::new(e.clone(), beta, pi.clone()).unwrap();
        let lhs = egr_log(&pi, &e.iter().map(|x| -beta * x).collect::<Vec<_>>()).unwrap();
        let rhs = beta * (spec.internal_energy() - free_energy(&spec));
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn campbell_identity(
        (pi, lengths) in (1usize..8).prop_flat_map(|n| (interior(n), prop::collection::vec(1u32..12, n))),
        d in 2u32..5,
        rho in 0.05f64..3.0,
    ) {
        let spec = CodeSpec::new(lengths.clone(), d, rho, pi.clone()).unwrap();
        let ln_d = (d as f64).ln();
        let gr: Vec<f64> = lengths.iter().map(|&l| rho * l as f64 * ln_d).collect();
        let rhs = egr_log(&pi, &gr).unwrap() / (rho * ln_d);
        let lhs = campbell_length(&spec) - shannon_length(&spec);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
    }

    #[test]
    fn quadratic_term_with_cubic_correction((pi, r) in (2usize..6).prop_flat_map(|n| (interior(n), log_returns(n)))) {
        // γ(π, t r) = t²κ₂/2 + t³κ₃/6 + R with |R| ≤ t⁴ max|κ₄|/24 and, for
        // returns spread over a range D, |κ₄| ≤ 3D⁴/16.
        let m: f64 = pi.iter().zip(&r).map(|(p, x)| p * x).sum();
        let k3: f64 = pi.iter().zip(&r).map(|(p, x)| p * (x - m).powi(3)).sum();
        let hi = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
        let d = hi - lo;
        for t in [1e-1, 1e-2, 1e-3] {
            let tr: Vec<f64> = r.iter().map(|x| t * x).collect();
            let rem = egr_log(&pi, &tr).unwrap() - egr_quadratic_approx(&pi, &tr).unwrap() - t.powi(3) * k3 / 6.0;
            prop_assert!(rem.abs() <= (t * d).powi(4) / 128.0 + 1e-16, "t = {}: {} vs {}", t, rem, (t * d).powi(4) / 128.0);
        }
    }
}

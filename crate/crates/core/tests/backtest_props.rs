use egr::backtest::{rebalanced_decomposition, rolling_egr, synthetic_regime_panel, Regime, ReturnsPanel, Weighting};
use egr::Weights;
use proptest::prelude::*;

fn panel() -> impl Strategy<Value = ReturnsPanel> {
    (1usize..12, 1usize..60).prop_flat_map(|(n, t)| {
        prop::collection::vec(prop::collection::vec(0.5f64..1.8, n), t)
            .prop_map(|rows| ReturnsPanel::from_gross(rows).unwrap())
    })
}

proptest! {
    #[test]
    fn decomposition_identity(p in panel(), seed in any::<u64>()) {
        let n = p.assets();
        let raw: Vec<f64> = (0..n).map(|i| (seed.rotate_left(i as u32 * 7) % 1000) as f64 + 1.0).collect();
        let pi = egr::simplex::normalize(&raw).unwrap();
        let d = rebalanced_decomposition(&pi, &p).unwrap();
        prop_assert!(d.residual().abs() <= 1e-10);
        prop_assert!(d.per_period_egr.iter().all(|g| *g >= 0.0));
    }

    #[test]
    fn rolling_cumulative_is_nondecreasing_and_numeraire_free(
        (p, window, k) in panel().prop_flat_map(|p| {
            let (t, n) = (p.periods(), p.assets());
            (Just(p), 1..=t.min(9), 1..=n)
        }),
        a in prop::collection::vec(0.1f64..10.0, 60),
    ) {
        let roll = rolling_egr(&p, window, &Weighting::EqualOnTopK(k)).unwrap();
        for w in roll.cumulative().windows(2) {
            prop_assert!(w[1] >= w[0]);
        }
        let rescaled = p.rescale_rows(&a[..p.periods()]).unwrap();
        let other = rolling_egr(&rescaled, window, &Weighting::EqualOnTopK(k)).unwrap();
        for (x, y) in roll.per_window().iter().zip(other.per_window()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }
}

#[test]
fn fixed_weights_decomposition_on_regime_panel() {
    let regimes = [
        Regime {
            periods: 200,
            volatility: 0.01,
        },
        Regime {
            periods: 200,
            volatility: 0.05,
        },
    ];
    let p = synthetic_regime_panel(20, &regimes, 0.0003, 11).unwrap();
    let pi = Weights::barycenter(20).unwrap();
    let d = rebalanced_decomposition(&pi, &p).unwrap();
    assert!(d.residual().abs() <= 1e-10);
    let roll = rolling_egr(&p, 20, &Weighting::Fixed(pi)).unwrap();
    let w = roll.per_window();
    let median = |xs: &[f64]| {
        let mut v = xs.to_vec();
        v.sort_by(f64::total_cmp);
        0.5 * (v[v.len() / 2 - 1] + v[v.len() / 2])
    };
    let (calm, wild) = (median(&w[..10]), median(&w[10..]));
    assert!(wild > calm, "calm {calm}, wild {wild}");
}

#[test]
fn more_rebalancing_premium_means_more_wealth() {
    // both paths end at the same relative prices (2, 1/2) and share the weighted average
    let steady = ReturnsPanel::from_gross(vec![vec![2.0, 0.5], vec![1.0, 1.0]]).unwrap();
    let choppy = ReturnsPanel::from_gross(vec![vec![8.0, 0.25], vec![0.25, 2.0]]).unwrap();
    let pi = Weights::barycenter(2).unwrap();
    let a = rebalanced_decomposition(&pi, &steady).unwrap();
    let b = rebalanced_decomposition(&pi, &choppy).unwrap();
    assert!((a.weighted_avg_log_return - b.weighted_avg_log_return).abs() < 1e-15);
    assert!(b.cumulative_egr > a.cumulative_egr);
    assert!(b.total_log_return > a.total_log_return);
}

#[test]
fn constant_panel_has_no_excess_growth() {
    let p = ReturnsPanel::from_gross(vec![vec![1.01, 1.01, 1.01]; 30]).unwrap();
    let roll = rolling_egr(&p, 7, &Weighting::EqualOnTopK(2)).unwrap();
    assert!(roll.per_window().iter().all(|g| *g == 0.0));
}

//! Small numerical kernels shared across modules.

/// `log Σ_i w_i e^{x_i}` over entries with `w_i > 0`, shifted by the maximum
/// exponent so that `|x_i|` in the hundreds does not overflow.
///
/// Returns `-inf` when no weight is positive.
pub fn weighted_log_sum_exp(weights: &[f64], exponents: &[f64]) -> f64 {
    debug_assert_eq!(weights.len(), exponents.len());
    let max = weights
        .iter()
        .zip(exponents)
        .filter(|(w, _)| **w > 0.0)
        .map(|(_, x)| *x)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let s: f64 = weights
        .iter()
        .zip(exponents)
        .filter(|(w, _)| **w > 0.0)
        .map(|(w, x)| w * (x - max).exp())
        .sum();
    max + s.ln()
}

/// `log Σ_i e^{x_i}` with max shift.
pub fn log_sum_exp(exponents: &[f64]) -> f64 {
    let max = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + exponents.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Pairwise (tree) summation. The reduction order depends only on the
/// slice length, so results are bit-stable regardless of how the terms
/// were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lse_matches_naive_on_small_inputs() {
        let w = [0.2, 0.3, 0.5];
        let x = [0.1, -0.4, 1.3];
        let naive: f64 = w.iter().zip(&x).map(|(w, x)| w * f64::exp(*x)).sum::<f64>().ln();
        assert!((weighted_log_sum_exp(&w, &x) - naive).abs() < 1e-15);
    }

    #[test]
    fn lse_survives_large_exponents() {
        let v = weighted_log_sum_exp(&[0.5, 0.5], &[700.0, 700.0]);
        assert!((v - 700.0).abs() < 1e-12);
        let v = log_sum_exp(&[-800.0, -800.0]);
        assert!((v - (-800.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn lse_skips_zero_weights() {
        let v = weighted_log_sum_exp(&[1.0, 0.0], &[0.0, f64::NEG_INFINITY]);
        assert_eq!(v, 0.0);
        assert_eq!(weighted_log_sum_exp(&[0.0], &[3.0]), f64::NEG_INFINITY);
    }

    #[test]
    fn pairwise_sum_is_accurate() {
        let xs: Vec<f64> = (0..10_000).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-11);
    }
}

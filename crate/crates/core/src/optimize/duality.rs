use serde::Serialize;

use super::deterministic::{check_finite, two_point_mass};
use crate::error::{check_len, Error, Result};
use crate::numeric::weighted_log_sum_exp;
use crate::simplex::{closure_exp, Weights};

const ROOT_TOL: f64 = 1e-10;
const BISECTION_BUDGET: usize = 200;
const BRACKET_BUDGET: usize = 200;

/// Which regime produced a [`DualSolveResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DualBranch {
    /// Fixed λ, closed form.
    Penalized,
    /// η = 0: λ* = ∞ and q* = π.
    ZeroRadius,
    /// η ≥ η̄: the λ ↓ 0 limit.
    Limit,
    /// λ* found by root finding.
    Interior,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualSolveResult {
    /// +∞ for the zero-radius case, 0 for the limit branch.
    pub lambda_star: f64,
    pub pi_star: Weights,
    pub q_star: Weights,
    pub value: f64,
    /// |H − η| at the returned multiplier (penalized: objective mismatch).
    pub kkt_residual: f64,
    pub iterations: usize,
    pub branch: DualBranch,
}

/// η̄(r) = −log Σ_{j ∈ argmax_{supp π} r} π_j.
pub fn eta_bar(pi: &Weights, r: &[f64]) -> Result<f64> {
    check_len(pi.len(), r.len())?;
    let hi = pi.support().into_iter().map(|i| r[i]).fold(f64::NEG_INFINITY, f64::max);
    let mass: f64 = pi.support().into_iter().filter(|&i| r[i] == hi).map(|i| pi[i]).sum();
    let total: f64 = pi.iter().sum();
    Ok(-(mass / total).ln().min(0.0))
}

/// H(q(r/λ) || π) for the tilt q(r/λ) = π ⊕_π C[e^{r/λ}], together with
/// that tilt. Returns are shifted by their maximum on supp(π) first, so the
/// two terms of ⟨q, r/λ⟩ − log Σ π e^{r/λ} stay of order one for small λ.
pub fn tilt_divergence(pi: &Weights, r: &[f64], lambda: f64) -> Result<(f64, Weights)> {
    check_len(pi.len(), r.len())?;
    let hi = pi.support().into_iter().map(|i| r[i]).fold(f64::NEG_INFINITY, f64::max);
    let s: Vec<f64> = r.iter().map(|x| (x - hi) / lambda).collect();
    let logs: Vec<f64> = pi
        .iter()
        .zip(&s)
        .map(|(p, x)| if *p > 0.0 { p.ln() + x } else { f64::NEG_INFINITY })
        .collect();
    let q = closure_exp(&logs, pi)?;
    let total: f64 = pi.iter().sum();
    let lse = weighted_log_sum_exp(pi, &s) - total.ln();
    let lin: f64 = q.iter().zip(&s).filter(|(w, _)| **w > 0.0).map(|(w, x)| w * x).sum();
    Ok(((lin - lse).max(0.0), q))
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta >= 0.0) || !eta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "eta must be finite and nonnegative, got {eta}"
        )));
    }
    Ok(())
}

/// Bisection in log coordinates on an increasing `g` over [lo, hi] for
/// g = target.
fn bisect<G: FnMut(f64) -> Result<f64>>(mut g: G, mut lo: f64, mut hi: f64, target: f64) -> Result<(f64, usize)> {
    for it in 1..=BISECTION_BUDGET {
        let mid = (lo * hi).sqrt();
        let v = g(mid)?;
        if (v - target).abs() <= ROOT_TOL {
            return Ok((mid, it));
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-15 {
            return Err(Error::NoConvergence {
                iterations: it,
                reason: format!("bracket collapsed at {mid} with residual {}", (v - target).abs()),
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: BISECTION_BUDGET,
        reason: "bisection budget exhausted".into(),
    })
}

/// Grow or shrink `x0` geometrically until `g(lo) < target < g(hi)` for an
/// increasing `g`.
fn bracket<G: FnMut(f64) -> Result<f64>>(mut g: G, x0: f64, target: f64) -> Result<(f64, f64)> {
    let v0 = g(x0)?;
    let (mut lo, mut hi) = (x0, x0);
    if v0 < target {
        for _ in 0..BRACKET_BUDGET {
            lo = hi;
            hi *= 2.0;
            if g(hi)? >= target {
                return Ok((lo, hi));
            }
        }
    } else {
        for _ in 0..BRACKET_BUDGET {
            hi = lo;
            lo *= 0.5;
            if g(lo)? <= target {
                return Ok((lo, hi));
            }
        }
    }
    Err(Error::NoConvergence {
        iterations: BRACKET_BUDGET,
        reason: "could not bracket the multiplier; check the scaling of r".into(),
    })
}

/// Φ_η(r) = sup { ⟨q − π, r⟩ : H(q || π) ≤ η } through the perspective dual.
pub fn phi_eta(pi: &Weights, r: &[f64], eta: f64) -> Result<DualSolveResult> {
    check_len(pi.len(), r.len())?;
    check_eta(eta)?;
    for i in pi.support() {
        if !r[i].is_finite() {
            return Err(Error::DomainViolation(format!(
                "log return at index {i} is not finite inside supp(pi)"
            )));
        }
    }
    let support = pi.support();
    let mean: f64 = support.iter().map(|&i| pi[i] * r[i]).sum();
    if eta == 0.0 {
        return Ok(DualSolveResult {
            lambda_star: f64::INFINITY,
            pi_star: pi.clone(),
            q_star: pi.clone(),
            value: 0.0,
            kkt_residual: 0.0,
            iterations: 0,
            branch: DualBranch::ZeroRadius,
        });
    }
    let bar = eta_bar(pi, r)?;
    let hi = support.iter().map(|&i| r[i]).fold(f64::NEG_INFINITY, f64::max);
    if eta >= bar {
        let mass: f64 = support.iter().filter(|&&i| r[i] == hi).map(|&i| pi[i]).sum();
        let q: Vec<f64> = (0..pi.len())
            .map(|i| if pi[i] > 0.0 && r[i] == hi { pi[i] / mass } else { 0.0 })
            .collect();
        return Ok(DualSolveResult {
            lambda_star: 0.0,
            pi_star: pi.clone(),
            q_star: crate::simplex::normalize(&q)?,
            value: hi - mean,
            kkt_residual: 0.0,
            iterations: 0,
            branch: DualBranch::Limit,
        });
    }
    let lo_r = support.iter().map(|&i| r[i]).fold(f64::INFINITY, f64::min);
    // H(q(r/λ)||π) decreases in λ, so it increases in s = 1/λ
    let h = |s: f64| tilt_divergence(pi, r, 1.0 / s).map(|(v, _)| v);
    let s0 = eta.max(1e-8) / (hi - lo_r);
    let (s_lo, s_hi) = bracket(h, s0, eta)?;
    let (s_star, iterations) = bisect(h, s_lo, s_hi, eta)?;
    let lambda = 1.0 / s_star;
    let (h_star, q) = tilt_divergence(pi, r, lambda)?;
    let value: f64 = (0..pi.len())
        .filter(|&i| pi[i] > 0.0)
        .map(|i| (q[i] - pi[i]) * r[i])
        .sum();
    Ok(DualSolveResult {
        lambda_star: lambda,
        pi_star: pi.clone(),
        q_star: q,
        value,
        kkt_residual: (h_star - eta).abs(),
        iterations,
        branch: DualBranch::Interior,
    })
}

/// Two-point quantities at tilt δ = d/λ: (t, q, H(q || t)) with t the
/// optimal mass on the larger return and q its tilt. 1 − q is formed from
/// e^{−δ} so that it keeps relative precision as q → 1.
pub fn two_point_divergence(delta: f64) -> (f64, f64, f64) {
    let t = two_point_mass(delta);
    let e = (-delta).exp();
    let q = t / (t + (1.0 - t) * e);
    let q_c = (1.0 - t) * e / (t + (1.0 - t) * e);
    let mut h = q * (q / t).ln();
    if q_c > 0.0 {
        h += q_c * (q_c / (1.0 - t)).ln();
    }
    (t, q, h.max(0.0))
}

/// sup { ⟨q − π, r⟩ : π, q ∈ Δn, H(q || π) ≤ η }.
pub fn constrained_joint(r: &[f64], eta: f64) -> Result<DualSolveResult> {
    check_finite(r)?;
    check_eta(eta)?;
    let base = super::max_egr(r)?;
    let n = r.len();
    let Some((i, j)) = base.pair() else {
        return Ok(DualSolveResult {
            lambda_star: f64::INFINITY,
            pi_star: base.pi_star.clone(),
            q_star: base.pi_star,
            value: 0.0,
            kkt_residual: 0.0,
            iterations: 0,
            branch: DualBranch::ZeroRadius,
        });
    };
    let d = r[i] - r[j];
    let build = |a: f64, b: f64| {
        let mut w = vec![0.0; n];
        w[i] = a;
        w[j] = b;
        Weights::new(w)
    };
    if eta == 0.0 {
        let half = build(0.5, 0.5)?;
        return Ok(DualSolveResult {
            lambda_star: f64::INFINITY,
            pi_star: half.clone(),
            q_star: half,
            value: 0.0,
            kkt_residual: 0.0,
            iterations: 0,
            branch: DualBranch::ZeroRadius,
        });
    }
    // H(q(λ)||π(λ)) decreases in λ, hence increases in δ = d/λ, from 0 to ∞
    let g = |delta: f64| Ok(two_point_divergence(delta).2);
    let (lo, hi) = bracket(g, eta.max(1e-8), eta)?;
    let (delta, iterations) = bisect(g, lo, hi, eta)?;
    let (t, q, h) = two_point_divergence(delta);
    let e = (-delta).exp();
    let q_c = (1.0 - t) * e / (t + (1.0 - t) * e);
    Ok(DualSolveResult {
        lambda_star: d / delta,
        pi_star: build(t, 1.0 - t)?,
        q_star: build(q, q_c).or_else(|_| {
            crate::simplex::normalize(&{
                let mut w = vec![0.0; n];
                w[i] = q;
                w[j] = q_c;
                w
            })
        })?,
        value: (q - t) * d,
        kkt_residual: (h - eta).abs(),
        iterations,
        branch: DualBranch::Interior,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::relative_entropy;

    fn w(v: &[f64]) -> Weights {
        Weights::new(v.to_vec()).unwrap()
    }

    #[test]
    fn zero_radius() {
        let pi = w(&[0.3, 0.7]);
        let res = phi_eta(&pi, &[0.0, 1.0], 0.0).unwrap();
        assert_eq!(res.value, 0.0);
        assert_eq!(res.q_star, pi);
        assert_eq!(res.lambda_star, f64::INFINITY);
    }

    #[test]
    fn limit_branch_is_exact() {
        let pi = w(&[0.2, 0.3, 0.5]);
        let r = [1.0, 0.5, 1.0];
        let bar = eta_bar(&pi, &r).unwrap();
        assert!((bar - (-(0.7f64).ln())).abs() < 1e-15);
        let res = phi_eta(&pi, &r, bar).unwrap();
        assert_eq!(res.branch, DualBranch::Limit);
        assert_eq!(res.value, 1.0 - (0.2 + 0.15 + 0.5));
        assert!((res.q_star[0] - 0.2 / 0.7).abs() < 1e-15);
        assert!((relative_entropy(&res.q_star, &pi).unwrap() - bar).abs() < 1e-15);
    }

    #[test]
    fn interior_root_hits_radius() {
        let pi = w(&[0.5, 0.5]);
        let res = phi_eta(&pi, &[0.0, 1.0], 0.1).unwrap();
        assert_eq!(res.branch, DualBranch::Interior);
        let h = relative_entropy(&res.q_star, &pi).unwrap();
        assert!((h - 0.1).abs() <= 1e-10);
        assert!(res.value > 0.0 && res.value < 0.5);
    }

    #[test]
    fn constant_returns_on_support_fall_into_limit_branch() {
        let pi = w(&[0.5, 0.5, 0.0]);
        let res = phi_eta(&pi, &[2.0, 2.0, 9.0], 0.3).unwrap();
        assert_eq!(res.value, 0.0);
        assert_eq!(res.q_star, pi);
    }

    #[test]
    fn constrained_joint_zero_radius() {
        let res = constrained_joint(&[0.2, -0.1, 0.7], 0.0).unwrap();
        assert_eq!(res.pi_star.as_slice(), &[0.0, 0.5, 0.5]);
        assert_eq!(res.q_star, res.pi_star);
        assert_eq!(res.value, 0.0);
    }

    #[test]
    fn constrained_joint_root() {
        let r = [0.2, -0.1, 0.7];
        let res = constrained_joint(&r, 0.2).unwrap();
        let h = relative_entropy(&res.q_star, &res.pi_star).unwrap();
        assert!((h - 0.2).abs() < 1e-10);
        let lin: f64 = (0..3).map(|i| (res.q_star[i] - res.pi_star[i]) * r[i]).sum();
        assert!((lin - res.value).abs() < 1e-14);
        // π* is the max-EGR portfolio at r/λ*
        let inner = super::super::max_egr(&r.map(|x| x / res.lambda_star)).unwrap();
        assert!((inner.pi_star[2] - res.pi_star[2]).abs() < 1e-12);
    }

    #[test]
    fn constrained_joint_handles_large_radius() {
        let res = constrained_joint(&[0.0, 1.0], 50.0).unwrap();
        assert!(res.kkt_residual <= 1e-10);
        assert!(res.value > 0.99 && res.value <= 1.0);
    }
}

use serde::Serialize;

use crate::egr::egr_log;
use crate::error::{check_len, Error, Result};
use crate::info::relative_entropy;
use crate::simplex::{closure_exp, Weights};

/// ⟨p − π, r⟩ − H(p || π); `-inf` when supp(p) ⊄ supp(π).
pub fn variational_objective(pi: &Weights, r: &[f64], p: &Weights) -> Result<f64> {
    check_len(pi.len(), r.len())?;
    check_len(pi.len(), p.len())?;
    let h = relative_entropy(p, pi)?;
    if h.is_infinite() {
        return Ok(f64::NEG_INFINITY);
    }
    let lin: f64 = (0..pi.len())
        .filter(|&i| pi[i] > 0.0 || p[i] > 0.0)
        .map(|i| (p[i] - pi[i]) * r[i])
        .sum();
    Ok(lin - h)
}

/// γ(π, r) together with its unique maximizer p* = π ⊕_π C[e^r] over
/// distributions supported inside supp(π).
pub fn variational_max(pi: &Weights, r: &[f64]) -> Result<(f64, Weights)> {
    let value = egr_log(pi, r)?;
    let logs: Vec<f64> = pi
        .iter()
        .zip(r)
        .map(|(p, x)| if *p > 0.0 { p.ln() + x } else { f64::NEG_INFINITY })
        .collect();
    Ok((value, closure_exp(&logs, pi)?))
}

/// Mass on the larger return in the optimal two-point portfolio when the
/// spread is `d`: t(d) = (e^d − 1 − d) / (d (e^d − 1)), with t(0) = 1/2.
pub fn two_point_mass(d: f64) -> f64 {
    if d <= 0.0 {
        return 0.5;
    }
    if d <= 0.5 {
        // ratio of Σ d^k/(k+2)! and Σ d^k/(k+1)!
        let (mut num, mut den) = (0.0, 0.0);
        let mut term = 1.0; // d^k / (k+1)!
        for k in 0..24 {
            den += term;
            let next = term * d / (k as f64 + 2.0);
            num += term / (k as f64 + 2.0);
            term = next;
        }
        return num / den;
    }
    let e = (-d).exp();
    let one_minus_e = -(-d).exp_m1();
    (one_minus_e - d * e) / (d * one_minus_e)
}

/// max_π γ(π, r) for a spread `d`: log((e^d − 1)/d) + d/(e^d − 1) − 1.
pub fn two_point_value(d: f64) -> f64 {
    if d <= 0.0 {
        return 0.0;
    }
    let v = if d < 1.0 {
        let em1 = d.exp_m1();
        (em1 / d).ln() + d / em1 - 1.0
    } else {
        let tail = -(-d).exp_m1(); // 1 − e^{−d}
        d + tail.ln() - d.ln() + d * (-d).exp() / tail - 1.0
    };
    v.max(0.0)
}

/// Where the optimal mass sits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SupportPair {
    /// Mass on the first argmax `argmax` and the first argmin `argmin`; the
    /// full tie sets are kept so callers can redistribute.
    Pair {
        argmax: usize,
        argmin: usize,
        argmax_ties: Vec<usize>,
        argmin_ties: Vec<usize>,
    },
    /// All returns equal; every portfolio is optimal.
    DegenerateConstant,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxEgrResult {
    pub pi_star: Weights,
    pub value: f64,
    pub support: SupportPair,
}

impl MaxEgrResult {
    pub fn pair(&self) -> Option<(usize, usize)> {
        match &self.support {
            SupportPair::Pair { argmax, argmin, .. } => Some((*argmax, *argmin)),
            SupportPair::DegenerateConstant => None,
        }
    }

    pub fn has_ties(&self) -> bool {
        match &self.support {
            SupportPair::Pair {
                argmax_ties,
                argmin_ties,
                ..
            } => argmax_ties.len() > 1 || argmin_ties.len() > 1,
            SupportPair::DegenerateConstant => false,
        }
    }
}

pub(crate) fn check_finite(r: &[f64]) -> Result<()> {
    if r.is_empty() {
        return Err(Error::InvalidArgument("empty return vector".into()));
    }
    if let Some((i, x)) = r.iter().enumerate().find(|(_, x)| !x.is_finite()) {
        return Err(Error::InvalidArgument(format!("log return at index {i} is {x}")));
    }
    Ok(())
}

/// max over Δn of γ(π, r): supported on the largest and smallest entries.
pub fn max_egr(r: &[f64]) -> Result<MaxEgrResult> {
    check_finite(r)?;
    let hi = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
    let n = r.len();
    if hi == lo {
        return Ok(MaxEgrResult {
            pi_star: Weights::barycenter(n)?,
            value: 0.0,
            support: SupportPair::DegenerateConstant,
        });
    }
    let argmax_ties: Vec<usize> = (0..n).filter(|&i| r[i] == hi).collect();
    let argmin_ties: Vec<usize> = (0..n).filter(|&i| r[i] == lo).collect();
    let (i, j) = (argmax_ties[0], argmin_ties[0]);
    let d = hi - lo;
    let t = two_point_mass(d);
    let mut w = vec![0.0; n];
    w[i] = t;
    w[j] = 1.0 - t;
    Ok(MaxEgrResult {
        pi_star: Weights::new(w)?,
        value: two_point_value(d),
        support: SupportPair::Pair {
            argmax: i,
            argmin: j,
            argmax_ties,
            argmin_ties,
        },
    })
}

/// Joint maximizer of ⟨q − π, r⟩ − λ H(q || π) over Δn × Δn.
pub fn penalized_joint(r: &[f64], lambda: f64) -> Result<super::DualSolveResult> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "lambda must be positive and finite, got {lambda}"
        )));
    }
    check_finite(r)?;
    let scaled: Vec<f64> = r.iter().map(|x| x / lambda).collect();
    let inner = max_egr(&scaled)?;
    let value = lambda * inner.value;
    let (_, q_star) = variational_max(&inner.pi_star, &scaled)?;
    let achieved = lambda * variational_objective(&inner.pi_star, &scaled, &q_star)?;
    Ok(super::DualSolveResult {
        lambda_star: lambda,
        pi_star: inner.pi_star,
        q_star,
        value,
        kkt_residual: (achieved - value).abs(),
        iterations: 0,
        branch: super::DualBranch::Penalized,
    })
}

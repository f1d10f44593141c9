//! Entropies, divergences, logarithmic divergences of exponentially concave
//! generators, and the Fisher–Rao quadratic form.

use std::ops::Deref;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::egr::{egr, egr_div};
use crate::error::{check_len, Error, Result};
use crate::numeric::log_sum_exp;
use crate::simplex::{closure, closure_exp, perturb, power, subtract, Weights};

/// H(p || q) = Σ p_i log(p_i / q_i); `+inf` when supp(p) ⊄ supp(q).
pub fn relative_entropy(p: &Weights, q: &Weights) -> Result<f64> {
    check_len(p.len(), q.len())?;
    let mut h = 0.0;
    for (&a, &b) in p.iter().zip(q.iter()) {
        if a > 0.0 {
            if b == 0.0 {
                return Ok(f64::INFINITY);
            }
            h += a * (a.ln() - b.ln());
        }
    }
    Ok(h.max(0.0))
}

/// H×(p || q) = −Σ p_i log q_i.
pub fn cross_entropy(p: &Weights, q: &Weights) -> Result<f64> {
    check_len(p.len(), q.len())?;
    let mut h = 0.0;
    for (i, (&a, &b)) in p.iter().zip(q.iter()).enumerate() {
        if a > 0.0 {
            if b == 0.0 {
                return Err(Error::DomainViolation(format!(
                    "q vanishes at index {i} inside supp(p)"
                )));
            }
            h -= a * b.ln();
        }
    }
    Ok(h)
}

/// H(p) = −Σ p_i log p_i.
pub fn shannon_entropy(p: &Weights) -> f64 {
    -p.iter().filter(|x| **x > 0.0).map(|x| x * x.ln()).sum::<f64>()
}

fn check_renyi_order(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || alpha == 1.0 || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "Renyi order must be positive, finite and different from 1, got {alpha}"
        )));
    }
    Ok(())
}

/// Discrete Rényi divergence (1/(α−1)) log Σ p_i^α q_i^{1−α}.
pub fn renyi_divergence(alpha: f64, p: &Weights, q: &Weights) -> Result<f64> {
    check_renyi_order(alpha)?;
    check_len(p.len(), q.len())?;
    let mut terms = Vec::with_capacity(p.len());
    for (i, (&a, &b)) in p.iter().zip(q.iter()).enumerate() {
        if a > 0.0 {
            if b == 0.0 {
                return Err(Error::DomainViolation(format!(
                    "q vanishes at index {i} inside supp(p)"
                )));
            }
            terms.push(alpha * a.ln() + (1.0 - alpha) * b.ln());
        }
    }
    Ok(log_sum_exp(&terms) / (alpha - 1.0))
}

/// Monte Carlo estimate of a Rényi divergence with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenyiEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Sample-based Rényi divergence of order α between densities f1 and f2.
///
/// `log_ratios` holds `log f1(Y_k) − log f2(Y_k)` for draws `Y_k ~ f1`, so
/// that `∫ f1^α f2^{1−α} = E_{f1}[(f1/f2)^{α−1}]`. The standard error
/// comes from the delta method applied to the log of the sample mean.
pub fn renyi_divergence_mc(alpha: f64, log_ratios: &[f64]) -> Result<RenyiEstimate> {
    check_renyi_order(alpha)?;
    if log_ratios.len() < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    if log_ratios.iter().any(|x| !x.is_finite()) {
        return Err(Error::DomainViolation("non-finite log density ratio".into()));
    }
    let k = log_ratios.len() as f64;
    let expo: Vec<f64> = log_ratios.iter().map(|d| (alpha - 1.0) * d).collect();
    let shift = expo.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = expo.iter().map(|e| (e - shift).exp()).collect();
    let mean = w.iter().sum::<f64>() / k;
    let var = w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    let value = (mean.ln() + shift) / (alpha - 1.0);
    let std_error = var.sqrt() / (mean * k.sqrt()) / (alpha - 1.0).abs();
    Ok(RenyiEstimate {
        value,
        std_error,
        samples: log_ratios.len(),
    })
}

fn require_positive_on(pi: &Weights, r: &[f64]) -> Result<()> {
    check_len(pi.len(), r.len())?;
    for i in pi.support() {
        if !(r[i] > 0.0) {
            return Err(Error::DomainViolation(format!("entry {i} vanishes inside supp(pi)")));
        }
    }
    Ok(())
}

/// (Γ(π, r), H(π || π ⊕_π r)).
pub fn egr_identity_lhs_rhs(pi: &Weights, r: &Weights) -> Result<(f64, f64)> {
    require_positive_on(pi, r)?;
    let lhs = egr(pi, r)?;
    let rhs = relative_entropy(pi, &perturb(pi, r, pi)?)?;
    Ok((lhs, rhs))
}

/// (Γ(π, r ⊖_π π), H(π || C_π[r])).
pub fn egr_identity_ominus(pi: &Weights, r: &Weights) -> Result<(f64, f64)> {
    require_positive_on(pi, r)?;
    let lhs = egr(pi, &subtract(r, pi, pi)?)?;
    let rhs = relative_entropy(pi, &closure(r, pi)?)?;
    Ok((lhs, rhs))
}

/// (Γ_π(q || p), H(π || π ⊕_π (q ⊖_π p))).
pub fn egr_divergence_identity(pi: &Weights, q: &Weights, p: &Weights) -> Result<(f64, f64)> {
    require_positive_on(pi, q)?;
    require_positive_on(pi, p)?;
    let lhs = egr_div(pi, q, p)?;
    let rhs = relative_entropy(pi, &perturb(pi, &subtract(q, p, pi)?, pi)?)?;
    Ok((lhs, rhs))
}

/// Built-in exponentially concave generators on the open simplex.
#[derive(Debug, Clone, PartialEq)]
pub enum ExpConcaveGenerator {
    /// φ(p) = Σ π_i log p_i.
    NegCrossEntropy { pi: Weights },
    /// φ(p) = (1/λ) log Σ p_i^λ with λ ∈ (0, 1).
    RenyiPotential { lambda: f64, dim: usize },
}

const GENERATOR_CHECK_SEED: u64 = 0x5eed_e6c0;
const GENERATOR_CHECK_TRIPLES: usize = 100;

fn random_interior<R: Rng>(rng: &mut R, n: usize) -> Weights {
    // uniform on the simplex: normalized standard exponentials
    let x: Vec<f64> = (0..n)
        .map(|_| -rng.sample::<f64, _>(rand::distr::Open01).ln())
        .collect();
    crate::simplex::normalize(&x).expect("positive draws")
}

impl ExpConcaveGenerator {
    pub fn neg_cross_entropy(pi: Weights) -> Result<Self> {
        let g = ExpConcaveGenerator::NegCrossEntropy { pi };
        g.check_exp_concavity()?;
        Ok(g)
    }

    pub fn renyi_potential(lambda: f64, dim: usize) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "lambda must lie in (0, 1), got {lambda}"
            )));
        }
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        let g = ExpConcaveGenerator::RenyiPotential { lambda, dim };
        g.check_exp_concavity()?;
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        match self {
            ExpConcaveGenerator::NegCrossEntropy { pi } => pi.len(),
            ExpConcaveGenerator::RenyiPotential { dim, .. } => *dim,
        }
    }

    /// Midpoint-type check of concavity of e^φ on random triples (p, q, t).
    fn check_exp_concavity(&self) -> Result<()> {
        let n = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(GENERATOR_CHECK_SEED);
        for _ in 0..GENERATOR_CHECK_TRIPLES {
            let p = random_interior(&mut rng, n);
            let q = random_interior(&mut rng, n);
            let t: f64 = rng.random();
            let mid: Vec<f64> = p.iter().zip(q.iter()).map(|(a, b)| t * a + (1.0 - t) * b).collect();
            let mid = Weights::new(mid.clone()).or_else(|_| crate::simplex::normalize(&mid))?;
            let lhs = self.evaluate(&mid)?.exp();
            let rhs = t * self.evaluate(&p)?.exp() + (1.0 - t) * self.evaluate(&q)?.exp();
            if lhs < rhs - 1e-12 * rhs.abs().max(1.0) {
                return Err(Error::GeneratorViolation { value: lhs - rhs });
            }
        }
        Ok(())
    }

    fn check_point(&self, p: &Weights) -> Result<()> {
        check_len(self.dim(), p.len())?;
        p.require_interior()
    }

    pub fn evaluate(&self, p: &Weights) -> Result<f64> {
        self.check_point(p)?;
        Ok(match self {
            ExpConcaveGenerator::NegCrossEntropy { pi } => pi
                .iter()
                .zip(p.iter())
                .filter(|(w, _)| **w > 0.0)
                .map(|(w, x)| w * x.ln())
                .sum(),
            ExpConcaveGenerator::RenyiPotential { lambda, .. } => {
                let logs: Vec<f64> = p.iter().map(|x| lambda * x.ln()).collect();
                log_sum_exp(&logs) / lambda
            }
        })
    }

    /// Gradient in ambient coordinates.
    pub fn gradient(&self, p: &Weights) -> Result<Vec<f64>> {
        self.check_point(p)?;
        Ok(match self {
            ExpConcaveGenerator::NegCrossEntropy { pi } => pi.iter().zip(p.iter()).map(|(w, x)| w / x).collect(),
            ExpConcaveGenerator::RenyiPotential { lambda, .. } => {
                let logs: Vec<f64> = p.iter().map(|x| lambda * x.ln()).collect();
                let lse = log_sum_exp(&logs);
                p.iter().map(|x| ((lambda - 1.0) * x.ln() - lse).exp()).collect()
            }
        })
    }

    /// φ(q) − φ(p), evaluated as a single sum to avoid cancellation.
    fn difference(&self, q: &Weights, p: &Weights) -> f64 {
        match self {
            ExpConcaveGenerator::NegCrossEntropy { pi } => pi
                .iter()
                .zip(q.iter().zip(p.iter()))
                .filter(|(w, _)| **w > 0.0)
                .map(|(w, (a, b))| w * (a.ln() - b.ln()))
                .sum(),
            ExpConcaveGenerator::RenyiPotential { lambda, .. } => {
                let lq: Vec<f64> = q.iter().map(|x| lambda * x.ln()).collect();
                let lp: Vec<f64> = p.iter().map(|x| lambda * x.ln()).collect();
                (log_sum_exp(&lq) - log_sum_exp(&lp)) / lambda
            }
        }
    }
}

/// L_φ(q || p) = log(1 + ⟨∇φ(p), q − p⟩) − (φ(q) − φ(p)).
pub fn log_divergence(phi: &ExpConcaveGenerator, q: &Weights, p: &Weights) -> Result<f64> {
    phi.check_point(q)?;
    let grad = phi.gradient(p)?;
    let arg = match phi {
        // Σ π_i q_i / p_i, the exact form of 1 + ∇_{q−p}φ(p) for this generator
        ExpConcaveGenerator::NegCrossEntropy { pi } => {
            let s: f64 = pi.iter().sum();
            grad.iter().zip(q.iter()).map(|(g, x)| g * x).sum::<f64>() + (1.0 - s)
        }
        ExpConcaveGenerator::RenyiPotential { .. } => {
            1.0 + grad
                .iter()
                .zip(q.iter().zip(p.iter()))
                .map(|(g, (a, b))| g * (a - b))
                .sum::<f64>()
        }
    };
    if !(arg > 0.0) {
        return Err(Error::GeneratorViolation { value: arg });
    }
    Ok(arg.ln() - phi.difference(q, p))
}

/// |L_φ(q ⊕ h || p ⊕ h) − L_φ(q || p)|.
pub fn perturbation_invariance_residual(
    phi: &ExpConcaveGenerator,
    p: &Weights,
    q: &Weights,
    h: &Weights,
) -> Result<f64> {
    let full = Weights::barycenter(p.len())?;
    let ph = perturb(p, h, &full)?;
    let qh = perturb(q, h, &full)?;
    Ok((log_divergence(phi, &qh, &ph)? - log_divergence(phi, q, p)?).abs())
}

const TANGENCY_TOL: f64 = 1e-12;

fn check_tangent(p: &Weights, v: &[f64]) -> Result<()> {
    check_len(p.len(), v.len())?;
    p.require_interior()?;
    let sum: f64 = v.iter().sum();
    if sum.abs() > TANGENCY_TOL {
        return Err(Error::TangencyViolation { sum });
    }
    Ok(())
}

/// Fisher–Rao quadratic form Σ v_i² / p_i for a tangent vector v.
pub fn fisher_rao_form(p: &Weights, v: &[f64]) -> Result<f64> {
    check_tangent(p, v)?;
    Ok(v.iter().zip(p.iter()).map(|(x, y)| x * x / y).sum())
}

/// Σ_ij π_i (δ_ij − π_j) v_i v_j / (p_i p_j), the second-order coefficient of
/// t ↦ 2Γ_π(p + tv || p).
pub fn fisher_rao_form_weighted(pi: &Weights, p: &Weights, v: &[f64]) -> Result<f64> {
    check_tangent(p, v)?;
    check_len(p.len(), pi.len())?;
    let w: Vec<f64> = v.iter().zip(p.iter()).map(|(x, y)| x / y).collect();
    let mean: f64 = pi.iter().zip(&w).map(|(a, b)| a * b).sum();
    Ok(pi.iter().zip(&w).map(|(a, b)| a * (b - mean).powi(2)).sum())
}

/// Exponential coordinates θ_i = log(p_i / p_n), i < n.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpCoordinates(Vec<f64>);

impl ExpCoordinates {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("exponential coordinates must be finite".into()));
        }
        Ok(ExpCoordinates(theta))
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ExpCoordinates {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

pub fn to_exp_coords(p: &Weights) -> Result<ExpCoordinates> {
    p.require_interior()?;
    let last = p[p.len() - 1].ln();
    Ok(ExpCoordinates(p[..p.len() - 1].iter().map(|x| x.ln() - last).collect()))
}

pub fn from_exp_coords(theta: &ExpCoordinates) -> Weights {
    let mut logs = theta.0.clone();
    logs.push(0.0);
    let full = Weights::barycenter(logs.len()).expect("length >= 1");
    closure_exp(&logs, &full).expect("finite coordinates")
}

/// (α−1)·H_α(λ⊗q || λ⊗p) with α = 1/λ.
pub fn renyi_log_divergence_rhs(lambda: f64, q: &Weights, p: &Weights) -> Result<f64> {
    let alpha = 1.0 / lambda;
    Ok((alpha - 1.0) * renyi_divergence(alpha, &power(lambda, q)?, &power(lambda, p)?)?)
}

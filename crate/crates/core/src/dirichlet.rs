//! Scaled Dirichlet distributions: sampling, densities with respect to the
//! Aitchison measure, the location parametrization μ_{π,x,σ}, and numerical
//! checks of its large-deviation and Rényi-divergence behaviour.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::egr::egr_div;
use crate::error::{check_len, Error, Result};
use crate::info::{renyi_divergence_mc, shannon_entropy};
use crate::quadrature::aitchison_quadrature;
use crate::simplex::{closure_exp, Weights};

/// Shapes α and rates β of 𝒮𝒟(α, β).
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledDirichletParams {
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

fn check_positive(name: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::InvalidArgument(format!("{name} is empty")));
    }
    if let Some((i, x)) = v.iter().enumerate().find(|(_, x)| !(**x > 0.0) || !x.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "{name}[{i}] = {x}, expected a positive value"
        )));
    }
    Ok(())
}

impl ScaledDirichletParams {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        check_positive("alpha", &alpha)?;
        check_positive("beta", &beta)?;
        check_len(alpha.len(), beta.len())?;
        Ok(ScaledDirichletParams { alpha, beta })
    }

    /// The classical Dirichlet(α), i.e. unit rates.
    pub fn dirichlet(alpha: Vec<f64>) -> Result<Self> {
        let beta = vec![1.0; alpha.len()];
        Self::new(alpha, beta)
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }
}

/// μ_{π,x,σ} = 𝒮𝒟(π/σ, π ⊙ x⁻¹).
#[derive(Debug, Clone, PartialEq)]
pub struct LocationParams {
    pi: Weights,
    x: Weights,
    sigma: f64,
}

impl LocationParams {
    pub fn new(pi: Weights, x: Weights, sigma: f64) -> Result<Self> {
        check_len(pi.len(), x.len())?;
        pi.require_interior()?;
        x.require_interior()?;
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
        }
        Ok(LocationParams { pi, x, sigma })
    }

    pub fn pi(&self) -> &Weights {
        &self.pi
    }

    pub fn x(&self) -> &Weights {
        &self.x
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn to_params(&self) -> ScaledDirichletParams {
        ScaledDirichletParams {
            alpha: self.pi.iter().map(|p| p / self.sigma).collect(),
            beta: self.pi.iter().zip(self.x.iter()).map(|(p, x)| p / x).collect(),
        }
    }

    /// Same π and σ, new location.
    pub fn with_location(&self, x: Weights) -> Result<Self> {
        LocationParams::new(self.pi.clone(), x, self.sigma)
    }
}

/// Log of a Gamma(shape, 1) variate.
///
/// Marsaglia–Tsang squeeze for shape ≥ 1; shapes below 1 use the boost
/// G(a) = G(a + 1)·U^{1/a}, applied in log space so tiny shapes do not
/// underflow to zero.
pub fn ln_gamma_variate<R: Rng + ?Sized>(rng: &mut R, shape: f64) -> f64 {
    if shape < 1.0 {
        let u: f64 = rng.sample(Open01);
        return ln_gamma_variate(rng, shape + 1.0) + u.ln() / shape;
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let z: f64 = rng.sample(StandardNormal);
        let t = 1.0 + c * z;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u: f64 = rng.sample(Open01);
        if u < 1.0 - 0.0331 * z.powi(4) || u.ln() < 0.5 * z * z + d * (1.0 - v + v.ln()) {
            return d.ln() + v.ln();
        }
    }
}

fn draw<R: Rng + ?Sized>(rng: &mut R, params: &ScaledDirichletParams, full: &Weights) -> Weights {
    let logs: Vec<f64> = params
        .alpha
        .iter()
        .zip(&params.beta)
        .map(|(a, b)| ln_gamma_variate(rng, *a) - b.ln())
        .collect();
    closure_exp(&logs, full).expect("gamma log-variates are finite")
}

/// `count` independent draws. Draw k uses its own ChaCha8 stream
/// `(seed, k)`, so output is reproducible and independent of thread count.
pub fn sample(params: &ScaledDirichletParams, seed: u64, count: usize) -> Vec<Weights> {
    let full = Weights::barycenter(params.dim()).expect("dimension >= 1");
    (0..count)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            draw(&mut rng, params, &full)
        })
        .collect()
}

fn sum_ln_gamma(v: impl Iterator<Item = f64>) -> f64 {
    v.map(ln_gamma).sum()
}

/// Log density of 𝒮𝒟(α, β) with respect to the Aitchison measure:
/// log[Γ(Σα)√n / ∏Γ(α_i)] + Σ α_i log(β_i y_i) − (Σα) log Σ β_i y_i.
pub fn log_density_aitchison(params: &ScaledDirichletParams, y: &Weights) -> Result<f64> {
    check_len(params.dim(), y.len())?;
    y.require_interior()?;
    let n = params.dim() as f64;
    let total: f64 = params.alpha.iter().sum();
    let by: Vec<f64> = params.beta.iter().zip(y.iter()).map(|(b, y)| b * y).collect();
    let mix: f64 = by.iter().sum();
    Ok(
        ln_gamma(total) + 0.5 * n.ln() - sum_ln_gamma(params.alpha.iter().copied())
            + params.alpha.iter().zip(&by).map(|(a, v)| a * v.ln()).sum::<f64>()
            - total * mix.ln(),
    )
}

pub fn density_aitchison(params: &ScaledDirichletParams, y: &Weights) -> Result<f64> {
    Ok(log_density_aitchison(params, y)?.exp())
}

/// Log density of Dirichlet(α) with respect to Lebesgue measure on the
/// first n − 1 coordinates.
pub fn log_density_dirichlet_lebesgue(alpha: &[f64], y: &Weights) -> Result<f64> {
    check_positive("alpha", alpha)?;
    check_len(alpha.len(), y.len())?;
    y.require_interior()?;
    let total: f64 = alpha.iter().sum();
    Ok(ln_gamma(total) - sum_ln_gamma(alpha.iter().copied())
        + alpha.iter().zip(y.iter()).map(|(a, v)| (a - 1.0) * v.ln()).sum::<f64>())
}

/// log C_{π,σ} = log Γ(1/σ) + ½ log n − Σ log Γ(π_i/σ).
pub fn log_normalizer(pi: &Weights, sigma: f64) -> f64 {
    ln_gamma(1.0 / sigma) + 0.5 * (pi.len() as f64).ln() - sum_ln_gamma(pi.iter().map(|p| p / sigma))
}

/// Log density of μ_{π,x,σ} at y, through the generic scaled Dirichlet formula.
pub fn log_mu_density(loc: &LocationParams, y: &Weights) -> Result<f64> {
    log_density_aitchison(&loc.to_params(), y)
}

pub fn mu_density(loc: &LocationParams, y: &Weights) -> Result<f64> {
    Ok(log_mu_density(loc, y)?.exp())
}

/// The same log density written as log C − H(π)/σ − Γ_π(y || x)/σ.
pub fn log_mu_density_closed_form(loc: &LocationParams, y: &Weights) -> Result<f64> {
    check_len(loc.pi.len(), y.len())?;
    y.require_interior()?;
    let s = loc.sigma;
    Ok(log_normalizer(&loc.pi, s) - shannon_entropy(&loc.pi) / s - egr_div(&loc.pi, y, &loc.x)? / s)
}

/// |−σ log f(y) − Γ_π(y || x)| for the density f of μ_{π,x,σ}.
pub fn ldp_gap(loc: &LocationParams, y: &Weights) -> Result<f64> {
    let f = log_mu_density(loc, y)?;
    Ok((-loc.sigma * f - egr_div(&loc.pi, y, &loc.x)?).abs())
}

/// Outcome of a numerical check of H_{1+σ}(μ_{π,y,σ} || μ_{π,x,σ}) = Γ_π(y||x)/σ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenyiCheck {
    /// Numerically evaluated Rényi divergence.
    pub divergence: f64,
    /// Γ_π(y || x) / σ.
    pub egr_over_sigma: f64,
    pub residual: f64,
    /// Monte Carlo standard error; `None` for the quadrature path.
    pub std_error: Option<f64>,
}

fn renyi_inputs(pi: &Weights, x: &Weights, y: &Weights, sigma: f64) -> Result<(LocationParams, LocationParams, f64)> {
    let mx = LocationParams::new(pi.clone(), x.clone(), sigma)?;
    let my = mx.with_location(y.clone())?;
    let target = egr_div(pi, y, x)? / sigma;
    Ok((mx, my, target))
}

/// Quadrature path (n = 2): (1/σ) log ∫ f_y^{1+σ} f_x^{−σ} dλ₂.
pub fn renyi_identity_quadrature(pi: &Weights, x: &Weights, y: &Weights, sigma: f64, tol: f64) -> Result<RenyiCheck> {
    if pi.len() != 2 {
        return Err(Error::InvalidArgument("the quadrature path needs n = 2".into()));
    }
    let (mx, my, target) = renyi_inputs(pi, x, y, sigma)?;
    let px = mx.to_params();
    let py = my.to_params();
    let integral = aitchison_quadrature(
        |a, b| {
            let z = Weights::new(vec![a, b]).unwrap_or_else(|_| Weights::new(vec![a, 1.0 - a]).expect("y1 in (0,1)"));
            match (log_density_aitchison(&py, &z), log_density_aitchison(&px, &z)) {
                (Ok(ly), Ok(lx)) => ((1.0 + sigma) * ly - sigma * lx).exp(),
                _ => 0.0,
            }
        },
        tol,
    )?;
    let divergence = integral.ln() / sigma;
    Ok(RenyiCheck {
        divergence,
        egr_over_sigma: target,
        residual: (divergence - target).abs(),
        std_error: None,
    })
}

/// Monte Carlo path: importance sampling with proposal μ_{π,y,σ}. The
/// weights (f_y/f_x)^σ are bounded above and below because the log ratio
/// of the two densities is a difference of two excess growth rates, so no
/// truncation is needed.
pub fn renyi_identity_monte_carlo(
    pi: &Weights,
    x: &Weights,
    y: &Weights,
    sigma: f64,
    samples: usize,
    seed: u64,
) -> Result<RenyiCheck> {
    let (mx, my, target) = renyi_inputs(pi, x, y, sigma)?;
    let px = mx.to_params();
    let py = my.to_params();
    let draws = sample(&py, seed, samples);
    let log_ratios: Vec<f64> = draws
        .par_iter()
        .map(|z| Ok(log_density_aitchison(&py, z)? - log_density_aitchison(&px, z)?))
        .collect::<Result<_>>()?;
    let est = renyi_divergence_mc(1.0 + sigma, &log_ratios)?;
    Ok(RenyiCheck {
        divergence: est.value,
        egr_over_sigma: target,
        residual: (est.value - target).abs(),
        std_error: Some(est.std_error),
    })
}

/// Dispatches on dimension: quadrature at tolerance 1e-10 for n = 2, Monte
/// Carlo with `samples` draws otherwise.
pub fn renyi_identity_residual(
    pi: &Weights,
    x: &Weights,
    y: &Weights,
    sigma: f64,
    samples: usize,
    seed: u64,
) -> Result<RenyiCheck> {
    if pi.len() == 2 {
        renyi_identity_quadrature(pi, x, y, sigma, 1e-10)
    } else {
        renyi_identity_monte_carlo(pi, x, y, sigma, samples, seed)
    }
}

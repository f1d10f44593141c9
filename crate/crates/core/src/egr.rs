//! The excess growth rate in its gross-return, log-return and divergence
//! forms, the chain rule, and the free-energy and code-length identities.

use crate::error::{check_len, Error, Result};
use crate::numeric::weighted_log_sum_exp;
use crate::simplex::{composite, CompositeSpec, Weights};

/// Log-form excess growth rate on `supp(π)`; `r` must already be finite
/// there. Entries off the support are ignored.
///
/// The weights are renormalized over their support, so a vector summing to
/// `1 ± 1e-12` still gives exactly zero for constant returns.
pub(crate) fn gamma_unchecked(pi: &[f64], r: &[f64]) -> f64 {
    let mut total = 0.0;
    let mut mean = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (&p, &x) in pi.iter().zip(r) {
        if p > 0.0 {
            total += p;
            mean += p * x;
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    if lo == hi {
        return 0.0;
    }
    mean /= total;
    // Center on the weighted mean when the spread allows it: then
    // log Σ π e^{r-μ} = log1p(Σ π expm1(r-μ)), which keeps full relative
    // precision for small spreads.
    let value = if hi - mean < 700.0 {
        let mut s = 0.0;
        let mut drift = 0.0;
        for (&p, &x) in pi.iter().zip(r) {
            if p > 0.0 {
                s += p * (x - mean).exp_m1();
                drift += p * (x - mean);
            }
        }
        (s / total).ln_1p() - drift / total
    } else {
        let s: f64 = pi
            .iter()
            .zip(r)
            .filter(|(p, _)| **p > 0.0)
            .map(|(p, x)| p * (x - hi).exp())
            .sum();
        (s / total).ln() + (hi - mean)
    };
    value.max(0.0)
}

fn check_log_returns(pi: &Weights, r: &[f64]) -> Result<()> {
    check_len(pi.len(), r.len())?;
    for i in pi.support() {
        if !r[i].is_finite() {
            return Err(Error::DomainViolation(format!(
                "log return at index {i} is {} inside supp(pi)",
                r[i]
            )));
        }
    }
    if r.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidArgument("log returns contain NaN".into()));
    }
    Ok(())
}

fn log_gross(pi: &Weights, gross: &[f64]) -> Result<Vec<f64>> {
    check_len(pi.len(), gross.len())?;
    let mut out = Vec::with_capacity(gross.len());
    for (i, &g) in gross.iter().enumerate() {
        if g.is_nan() || g < 0.0 || g == f64::INFINITY {
            return Err(Error::InvalidArgument(format!("gross return at index {i} is {g}")));
        }
        if pi[i] > 0.0 && g == 0.0 {
            return Err(Error::DomainViolation(format!(
                "gross return at index {i} is zero inside supp(pi)"
            )));
        }
        out.push(g.ln());
    }
    Ok(out)
}

/// Γ(π, R) = log Σ π_i R_i − Σ π_i log R_i over supp(π).
pub fn egr(pi: &Weights, gross: &[f64]) -> Result<f64> {
    let r = log_gross(pi, gross)?;
    Ok(gamma_unchecked(pi, &r))
}

/// γ(π, r) = Γ(π, e^r), stable for log returns of any magnitude.
pub fn egr_log(pi: &Weights, r: &[f64]) -> Result<f64> {
    check_log_returns(pi, r)?;
    Ok(gamma_unchecked(pi, r))
}

/// Γ_π(Y || X) = Γ(π, Y/X).
pub fn egr_div(pi: &Weights, y: &[f64], x: &[f64]) -> Result<f64> {
    check_len(pi.len(), y.len())?;
    check_len(pi.len(), x.len())?;
    let mut r = vec![0.0; pi.len()];
    for i in pi.support() {
        if !(y[i] > 0.0 && x[i] > 0.0) || !y[i].is_finite() || !x[i].is_finite() {
            return Err(Error::DomainViolation(format!(
                "divergence arguments must be positive at index {i} (y = {}, x = {})",
                y[i], x[i]
            )));
        }
        r[i] = y[i].ln() - x[i].ln();
    }
    Ok(gamma_unchecked(pi, &r))
}

/// Both sides of the general chain rule.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainDecomposition {
    /// Γ(π∘p, a∘R).
    pub total: f64,
    /// Γ(π, a⟨⟨p, R⟩⟩).
    pub outer_term: f64,
    /// Γ(p^i, R^i) per block.
    pub inner_terms: Vec<f64>,
}

impl ChainDecomposition {
    /// `total − (outer + Σ_{supp π} π_i inner_i)`.
    pub fn residual(&self, outer: &Weights) -> f64 {
        let inner: f64 = outer
            .iter()
            .zip(&self.inner_terms)
            .filter(|(p, _)| **p > 0.0)
            .map(|(p, g)| p * g)
            .sum();
        self.total - (self.outer_term + inner)
    }
}

pub fn chain_decompose(spec: &CompositeSpec, returns: &[Vec<f64>]) -> Result<ChainDecomposition> {
    let outer = spec.outer();
    check_len(outer.len(), returns.len())?;
    let n = outer.len();
    let mut inner_terms = Vec::with_capacity(n);
    let mut block_means = Vec::with_capacity(n);
    let mut scaled = Vec::with_capacity(spec.total_len());
    for (i, (block, ret)) in spec.blocks().iter().zip(returns).enumerate() {
        inner_terms.push(egr(block, ret)?);
        block_means.push(block.iter().zip(ret).map(|(p, r)| p * r).sum::<f64>());
        let a = spec.scale().map_or(1.0, |s| s[i]);
        scaled.extend(ret.iter().map(|r| a * r));
    }
    let outer_returns: Vec<f64> = match spec.scale() {
        Some(a) => a.iter().zip(&block_means).map(|(a, m)| a * m).collect(),
        None => block_means,
    };
    let outer_term = egr(outer, &outer_returns)?;
    let total = egr(&composite(spec)?, &scaled)?;
    Ok(ChainDecomposition {
        total,
        outer_term,
        inner_terms,
    })
}

/// Energies, inverse temperature and reference distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySpec {
    energies: Vec<f64>,
    beta: f64,
    pi: Weights,
}

impl EnergySpec {
    pub fn new(energies: Vec<f64>, beta: f64, pi: Weights) -> Result<Self> {
        check_len(pi.len(), energies.len())?;
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "beta must be positive and finite, got {beta}"
            )));
        }
        for i in pi.support() {
            if !energies[i].is_finite() {
                return Err(Error::DomainViolation(format!("energy at index {i} is not finite")));
            }
        }
        Ok(EnergySpec { energies, beta, pi })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn pi(&self) -> &Weights {
        &self.pi
    }

    fn neg_beta_energy(&self) -> Vec<f64> {
        self.energies.iter().map(|e| -self.beta * e).collect()
    }

    /// U = Σ π_i E_i.
    pub fn internal_energy(&self) -> f64 {
        let s: f64 = self.pi.iter().filter(|p| **p > 0.0).sum();
        self.pi
            .iter()
            .zip(&self.energies)
            .filter(|(p, _)| **p > 0.0)
            .map(|(p, e)| p * e)
            .sum::<f64>()
            / s
    }
}

/// Gibbs distribution p*_i ∝ π_i e^{−βE_i}.
pub fn gibbs(spec: &EnergySpec) -> Weights {
    let logs: Vec<f64> = spec
        .pi
        .iter()
        .zip(spec.neg_beta_energy())
        .map(|(p, x)| if *p > 0.0 { p.ln() + x } else { f64::NEG_INFINITY })
        .collect();
    crate::simplex::closure_exp(&logs, &spec.pi).expect("energies validated at construction")
}

/// Helmholtz free energy A = −(1/β) log Σ π_j e^{−βE_j}.
pub fn free_energy(spec: &EnergySpec) -> f64 {
    let s: f64 = spec.pi.iter().filter(|p| **p > 0.0).sum();
    -(weighted_log_sum_exp(&spec.pi, &spec.neg_beta_energy()) - s.ln()) / spec.beta
}

/// Codeword lengths with alphabet size and Campbell exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeSpec {
    lengths: Vec<u32>,
    alphabet: u32,
    rho: f64,
    pi: Weights,
}

impl CodeSpec {
    pub fn new(lengths: Vec<u32>, alphabet: u32, rho: f64, pi: Weights) -> Result<Self> {
        check_len(pi.len(), lengths.len())?;
        if lengths.contains(&0) {
            return Err(Error::InvalidArgument("code lengths must be at least 1".into()));
        }
        if alphabet < 2 {
            return Err(Error::InvalidArgument(format!(
                "alphabet size must be at least 2, got {alphabet}"
            )));
        }
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::InvalidArgument(format!("rho must be positive, got {rho}")));
        }
        pi.require_interior()?;
        Ok(CodeSpec {
            lengths,
            alphabet,
            rho,
            pi,
        })
    }

    pub fn lengths(&self) -> &[u32] {
        &self.lengths
    }

    pub fn alphabet(&self) -> u32 {
        self.alphabet
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn pi(&self) -> &Weights {
        &self.pi
    }

    /// ρ ℓ_i ln D, the log of D^{ρℓ_i}.
    pub fn log_exponentials(&self) -> Vec<f64> {
        let ln_d = (self.alphabet as f64).ln();
        self.lengths.iter().map(|&l| self.rho * l as f64 * ln_d).collect()
    }
}

/// L_ρ = (1/ρ) log_D Σ π_i D^{ρℓ_i}.
pub fn campbell_length(spec: &CodeSpec) -> f64 {
    let ln_d = (spec.alphabet as f64).ln();
    let s: f64 = spec.pi.iter().sum();
    (weighted_log_sum_exp(&spec.pi, &spec.log_exponentials()) - s.ln()) / (spec.rho * ln_d)
}

/// S = Σ π_i ℓ_i.
pub fn shannon_length(spec: &CodeSpec) -> f64 {
    let s: f64 = spec.pi.iter().sum();
    spec.pi
        .iter()
        .zip(&spec.lengths)
        .map(|(p, &l)| p * l as f64)
        .sum::<f64>()
        / s
}

/// Σ π_i r_i² − (Σ π_i r_i)², computed around the mean.
pub fn weighted_variance(pi: &Weights, r: &[f64]) -> Result<f64> {
    check_log_returns(pi, r)?;
    let s: f64 = pi.iter().filter(|p| **p > 0.0).sum();
    let mean = pi
        .iter()
        .zip(r)
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, x)| p * x)
        .sum::<f64>()
        / s;
    Ok(pi
        .iter()
        .zip(r)
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, x)| p * (x - mean).powi(2))
        .sum::<f64>()
        / s)
}

/// Second-order approximation γ(π, r) ≈ ½ Var_π(r).
pub fn egr_quadratic_approx(pi: &Weights, r: &[f64]) -> Result<f64> {
    Ok(0.5 * weighted_variance(pi, r)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplex::barycenter;

    fn w(v: &[f64]) -> Weights {
        Weights::new(v.to_vec()).unwrap()
    }

    #[test]
    fn egr_examples() {
        let half = barycenter(2).unwrap();
        assert_eq!(egr(&half, &[3.0, 3.0]).unwrap(), 0.0);
        // AM = 1.25, GM = 1
        assert!((egr(&half, &[2.0, 0.5]).unwrap() - 1.25f64.ln()).abs() < 1e-15);
        assert_eq!(egr(&w(&[1.0, 0.0]), &[5.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn egr_domain() {
        let half = barycenter(2).unwrap();
        assert!(matches!(egr(&half, &[1.0, 0.0]), Err(Error::DomainViolation(_))));
        assert!(matches!(egr(&half, &[1.0]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(
            egr_log(&half, &[0.0, f64::NEG_INFINITY]),
            Err(Error::DomainViolation(_))
        ));
        assert_eq!(egr_log(&w(&[1.0, 0.0]), &[0.3, f64::NEG_INFINITY]).unwrap(), 0.0);
    }

    #[test]
    fn egr_log_examples() {
        let half = barycenter(2).unwrap();
        let v = egr_log(&half, &[2f64.ln(), -(2f64.ln())]).unwrap();
        assert!((v - 1.25f64.ln()).abs() < 1e-15);
        assert_eq!(egr_log(&half, &[0.7, 0.7]).unwrap(), 0.0);
        let pi = w(&[0.2, 0.3, 0.5]);
        let r = [0.1, -0.5, 0.9];
        let base = egr_log(&pi, &r).unwrap();
        for s in [-600.0, 3.0, 650.0] {
            let shifted: Vec<f64> = r.iter().map(|x| x + s).collect();
            assert!((egr_log(&pi, &shifted).unwrap() - base).abs() < 1e-12);
        }
    }

    #[test]
    fn egr_log_survives_wide_spreads() {
        let half = barycenter(2).unwrap();
        let v = egr_log(&half, &[700.0, -700.0]).unwrap();
        // log(½ e^{700}) − 0
        assert!((v - (700.0 - 2f64.ln())).abs() < 1e-10);
        let v = egr_log(&half, &[0.0, 1400.0]).unwrap();
        assert!((v - (1400.0 - 2f64.ln() - 700.0)).abs() < 1e-10);
    }

    #[test]
    fn egr_div_examples() {
        let half = barycenter(2).unwrap();
        assert_eq!(egr_div(&half, &[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        let y = [4.0, 0.5];
        let x = [1.0, 1.0];
        let fwd = egr_div(&half, &y, &x).unwrap();
        let rev = egr_div(&half, &x, &y).unwrap();
        assert!((fwd - (2.25f64.ln() - 0.5 * 2f64.ln())).abs() < 1e-15);
        assert!((rev - ((9.0f64 / 8.0).ln() + 0.5 * 2f64.ln())).abs() < 1e-15);
        // uniform two-point weights only see |log(Y1/Y2)|, so both directions agree
        assert!((fwd - rev).abs() < 1e-15);
        let pi = w(&[0.3, 0.7]);
        let fwd_w = egr_div(&pi, &y, &x).unwrap();
        let rev_w = egr_div(&pi, &x, &y).unwrap();
        let f_oracle = (0.3f64 * 4.0 + 0.7 * 0.5).ln() - 0.3 * 4f64.ln() - 0.7 * 0.5f64.ln();
        let r_oracle = (0.3f64 * 0.25 + 0.7 * 2.0).ln() - 0.3 * 0.25f64.ln() - 0.7 * 2f64.ln();
        assert!((fwd_w - f_oracle).abs() < 1e-15 && (rev_w - r_oracle).abs() < 1e-15);
        assert!((fwd_w - rev_w).abs() > 0.05);
        let a = 7.3;
        let ya: Vec<f64> = y.iter().map(|v| a * v).collect();
        let xa: Vec<f64> = x.iter().map(|v| a * v).collect();
        assert!((egr_div(&half, &ya, &xa).unwrap() - fwd).abs() < 1e-15);
    }

    #[test]
    fn chain_rule_constant_inner_returns() {
        let spec = CompositeSpec::new(w(&[0.3, 0.7]), vec![w(&[0.5, 0.5]), w(&[0.1, 0.2, 0.7])], None).unwrap();
        let returns = vec![vec![2.0, 2.0], vec![0.5, 0.5, 0.5]];
        let d = chain_decompose(&spec, &returns).unwrap();
        assert!(d.inner_terms.iter().all(|&g| g == 0.0));
        assert!((d.total - d.outer_term).abs() < 1e-15);
    }

    #[test]
    fn chain_rule_singleton_blocks_recover_numeraire_invariance() {
        let pi = w(&[0.2, 0.5, 0.3]);
        let r = [1.1, 0.7, 1.9];
        let a = 3.5;
        let spec = CompositeSpec::new(pi.clone(), vec![w(&[1.0]); 3], Some(vec![a; 3])).unwrap();
        let d = chain_decompose(&spec, &r.iter().map(|x| vec![*x]).collect::<Vec<_>>()).unwrap();
        let direct = egr(&pi, &r).unwrap();
        assert!((d.total - direct).abs() < 1e-15);
        assert!((d.outer_term - direct).abs() < 1e-15);
    }

    #[test]
    fn gibbs_examples() {
        let half = barycenter(2).unwrap();
        let g = gibbs(&EnergySpec::new(vec![0.0, 3f64.ln()], 1.0, half.clone()).unwrap());
        assert!((g[0] - 0.75).abs() < 1e-15 && (g[1] - 0.25).abs() < 1e-15);
        let pi = w(&[0.2, 0.8]);
        let g = gibbs(&EnergySpec::new(vec![4.0, 4.0], 2.0, pi.clone()).unwrap());
        assert!((g[0] - 0.2).abs() < 1e-15);
        let e = vec![0.3, -1.2];
        let a = gibbs(&EnergySpec::new(e.clone(), 2.5, pi.clone()).unwrap());
        let b = gibbs(&EnergySpec::new(e.iter().map(|x| 2.5 * x).collect(), 1.0, pi).unwrap());
        assert!((a[0] - b[0]).abs() < 1e-15);
    }

    #[test]
    fn free_energy_examples() {
        let pi = w(&[0.2, 0.3, 0.5]);
        let spec = EnergySpec::new(vec![1.7; 3], 0.4, pi.clone()).unwrap();
        assert!((free_energy(&spec) - 1.7).abs() < 1e-15);
        let e = vec![0.5, -2.0, 1.0];
        let spec = EnergySpec::new(e.clone(), 1.3, pi.clone()).unwrap();
        let lhs = egr_log(&pi, &e.iter().map(|x| -1.3 * x).collect::<Vec<_>>()).unwrap();
        let rhs = 1.3 * (spec.internal_energy() - free_energy(&spec));
        assert!((lhs - rhs).abs() < 1e-14);
        assert!(EnergySpec::new(e, 0.0, pi).is_err());
    }

    #[test]
    fn campbell_examples() {
        let half = barycenter(2).unwrap();
        let spec = CodeSpec::new(vec![1, 2], 2, 1.0, half.clone()).unwrap();
        let l = campbell_length(&spec);
        assert!((l - 3f64.log2()).abs() < 1e-15);
        assert!((shannon_length(&spec) - 1.5).abs() < 1e-15);
        let g = egr(&half, &[2.0, 4.0]).unwrap() / 2f64.ln();
        assert!((l - 1.5 - g).abs() < 1e-15);
        let oracle = (3f64.ln() - 1.5 * 2f64.ln()) / 2f64.ln();
        assert!((g - oracle).abs() < 1e-15);

        let spec = CodeSpec::new(vec![3, 3, 3], 5, 0.3, barycenter(3).unwrap()).unwrap();
        assert!((campbell_length(&spec) - 3.0).abs() < 1e-14);
        assert_eq!(shannon_length(&spec), 3.0);
        assert!(CodeSpec::new(vec![0, 1], 2, 1.0, half).is_err());
    }

    #[test]
    fn variance_examples() {
        let half = barycenter(2).unwrap();
        assert_eq!(weighted_variance(&half, &[2.0, 2.0]).unwrap(), 0.0);
        assert!((weighted_variance(&half, &[1.0, -1.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((egr_quadratic_approx(&half, &[1.0, -1.0]).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn n_equals_one_vanishes() {
        let one = w(&[1.0]);
        assert_eq!(egr(&one, &[3.0]).unwrap(), 0.0);
        assert_eq!(egr_log(&one, &[-4.0]).unwrap(), 0.0);
        assert_eq!(egr_div(&one, &[3.0], &[2.0]).unwrap(), 0.0);
    }
}

//! Points of the closed simplex and the Aitchison-style operations on them.
//!
//! Supports are exact: an index belongs to the support of a vector iff the
//! entry is strictly positive. Nothing is renormalized implicitly; use
//! [`closure`] or [`normalize`] when a vector has to be pushed onto the
//! simplex.

use std::ops::Deref;

use serde::Serialize;

use crate::error::{check_len, Error, Result};

/// Tolerance on `|Σ w_i - 1|` accepted when constructing [`Weights`].
pub const SUM_TOL: f64 = 1e-12;

/// A point of the closed unit simplex Δn.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Weights(Vec<f64>);

impl Weights {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidWeights("empty vector".into()));
        }
        if let Some((i, x)) = w.iter().enumerate().find(|(_, x)| !x.is_finite() || **x < 0.0) {
            return Err(Error::InvalidWeights(format!("entry {i} is {x}")));
        }
        let s: f64 = w.iter().sum();
        if (s - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidWeights(format!("entries sum to {s}")));
        }
        Ok(Weights(w))
    }

    /// The barycenter (1/n, ..., 1/n), the zero element of (Δn°, ⊕).
    pub fn barycenter(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidWeights("dimension must be at least 1".into()));
        }
        Ok(Weights(vec![1.0 / n as f64; n]))
    }

    /// The vertex e_i of Δn.
    pub fn vertex(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::InvalidArgument(format!("vertex {i} out of range for n = {n}")));
        }
        let mut w = vec![0.0; n];
        w[i] = 1.0;
        Ok(Weights(w))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn support(&self) -> Vec<usize> {
        support(&self.0)
    }

    pub fn in_support(&self, i: usize) -> bool {
        self.0[i] > 0.0
    }

    /// True when every entry is strictly positive.
    pub fn is_interior(&self) -> bool {
        self.0.iter().all(|&x| x > 0.0)
    }

    /// Error unless the point lies on the open simplex.
    pub fn require_interior(&self) -> Result<()> {
        match self.0.iter().position(|&x| x <= 0.0) {
            Some(index) => Err(Error::BoundaryPoint { index }),
            None => Ok(()),
        }
    }
}

impl Deref for Weights {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Weights {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Weights::new(v)
    }
}

/// Indices of the strictly positive entries (0-based).
pub fn support(x: &[f64]) -> Vec<usize> {
    x.iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(i, _)| i)
        .collect()
}

pub fn barycenter(n: usize) -> Result<Weights> {
    Weights::barycenter(n)
}

/// Componentwise product.
pub fn hadamard(x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    check_len(x.len(), y.len())?;
    Ok(x.iter().zip(y).map(|(a, b)| a * b).collect())
}

/// Componentwise inverse of a strictly positive vector.
pub fn comp_inverse(x: &[f64]) -> Result<Vec<f64>> {
    if let Some(index) = x.iter().position(|&v| v <= 0.0) {
        return Err(Error::BoundaryPoint { index });
    }
    Ok(x.iter().map(|v| 1.0 / v).collect())
}

fn check_nonneg(x: &[f64]) -> Result<()> {
    if let Some((i, v)) = x.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "entry {i} is {v}, expected a finite nonnegative value"
        )));
    }
    Ok(())
}

/// Closure of `x` with respect to the support of `reference`: zero off the
/// support, `x_i / Σ_{supp} x_j` on it.
pub fn closure(x: &[f64], reference: &Weights) -> Result<Weights> {
    check_len(reference.len(), x.len())?;
    check_nonneg(x)?;
    let mut total = 0.0;
    for (i, (&xi, &ri)) in x.iter().zip(reference.iter()).enumerate() {
        if ri > 0.0 {
            if xi <= 0.0 {
                return Err(Error::ZeroOnSupport { index: i });
            }
            total += xi;
        }
    }
    let out = x
        .iter()
        .zip(reference.iter())
        .map(|(&xi, &ri)| if ri > 0.0 { xi / total } else { 0.0 })
        .collect();
    Ok(Weights(out))
}

/// Closure with respect to the support of `x` itself (the plain C[x]).
pub fn normalize(x: &[f64]) -> Result<Weights> {
    if x.is_empty() {
        return Err(Error::InvalidWeights("empty vector".into()));
    }
    check_nonneg(x)?;
    let total: f64 = x.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "cannot normalize a vector with total {total}"
        )));
    }
    Ok(Weights(x.iter().map(|v| v / total).collect()))
}

/// Closure of `exp(log_x)` relative to the support of `reference`, computed
/// with a max shift so that large log-coordinates do not overflow.
pub fn closure_exp(log_x: &[f64], reference: &Weights) -> Result<Weights> {
    check_len(reference.len(), log_x.len())?;
    let mut max = f64::NEG_INFINITY;
    for (i, (&l, &r)) in log_x.iter().zip(reference.iter()).enumerate() {
        if r > 0.0 {
            if l == f64::NEG_INFINITY {
                return Err(Error::ZeroOnSupport { index: i });
            }
            if !l.is_finite() {
                return Err(Error::InvalidArgument(format!("log-coordinate {i} is {l}")));
            }
            max = max.max(l);
        }
    }
    let shifted: Vec<f64> = log_x
        .iter()
        .zip(reference.iter())
        .map(|(&l, &r)| if r > 0.0 { (l - max).exp() } else { 0.0 })
        .collect();
    let total: f64 = shifted.iter().sum();
    Ok(Weights(shifted.into_iter().map(|v| v / total).collect()))
}

/// Perturbation `x ⊕_ref y = C_ref[x ⊙ y]`.
pub fn perturb(x: &[f64], y: &[f64], reference: &Weights) -> Result<Weights> {
    check_len(x.len(), y.len())?;
    closure(&hadamard(x, y)?, reference)
}

/// Generalized difference `x ⊖_ref y`: `(x_i / y_i)` closed over supp(ref).
pub fn subtract(x: &[f64], y: &[f64], reference: &Weights) -> Result<Weights> {
    check_len(reference.len(), x.len())?;
    check_len(reference.len(), y.len())?;
    let mut ratio = vec![0.0; x.len()];
    for i in reference.support() {
        if y[i] <= 0.0 || x[i] <= 0.0 {
            return Err(Error::ZeroOnSupport { index: i });
        }
        ratio[i] = x[i] / y[i];
    }
    closure(&ratio, reference)
}

/// Powering `α ⊗ x = C[x^α]` on the open simplex.
pub fn power(alpha: f64, x: &Weights) -> Result<Weights> {
    x.require_interior()?;
    if !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("exponent {alpha} is not finite")));
    }
    let logs: Vec<f64> = x.iter().map(|v| alpha * v.ln()).collect();
    let full = Weights(vec![1.0 / x.len() as f64; x.len()]);
    closure_exp(&logs, &full)
}

/// Outer weights, inner blocks and an optional per-block scale: the data of a
/// composite distribution π∘p together with the conversion factors a of a∘R.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeSpec {
    outer: Weights,
    blocks: Vec<Weights>,
    scale: Option<Vec<f64>>,
}

impl CompositeSpec {
    pub fn new(outer: Weights, blocks: Vec<Weights>, scale: Option<Vec<f64>>) -> Result<Self> {
        check_len(outer.len(), blocks.len())?;
        if let Some(a) = &scale {
            check_len(outer.len(), a.len())?;
            check_nonneg(a)?;
            if let Some(i) = outer.support().into_iter().find(|&i| a[i] <= 0.0) {
                return Err(Error::DomainViolation(format!(
                    "scale vanishes at index {i} inside the outer support"
                )));
            }
        }
        Ok(CompositeSpec { outer, blocks, scale })
    }

    pub fn outer(&self) -> &Weights {
        &self.outer
    }

    pub fn blocks(&self) -> &[Weights] {
        &self.blocks
    }

    pub fn scale(&self) -> Option<&[f64]> {
        self.scale.as_deref()
    }

    /// Block sizes k_1, ..., k_n.
    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.len()).collect()
    }

    pub fn total_len(&self) -> usize {
        self.blocks.iter().map(|b| b.len()).sum()
    }
}

/// The composite distribution π∘p = (π_1 p^1, ..., π_n p^n).
pub fn composite(spec: &CompositeSpec) -> Result<Weights> {
    let mut out = Vec::with_capacity(spec.total_len());
    for (pi, block) in spec.outer.iter().zip(&spec.blocks) {
        out.extend(block.iter().map(|p| pi * p));
    }
    let s: f64 = out.iter().sum();
    if (s - 1.0).abs() > SUM_TOL {
        return Err(Error::InvalidWeights(format!("composite sums to {s}")));
    }
    Ok(Weights(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(v: &[f64]) -> Weights {
        Weights::new(v.to_vec()).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn weights_validation() {
        assert!(Weights::new(vec![]).is_err());
        assert!(Weights::new(vec![0.5, 0.6]).is_err());
        assert!(Weights::new(vec![-0.1, 1.1]).is_err());
        assert!(Weights::new(vec![f64::NAN, 1.0]).is_err());
        assert!(Weights::new(vec![1.0]).is_ok());
        assert!(Weights::new(vec![0.5, 0.5 + 1e-13]).is_ok());
        assert!(Weights::new(vec![0.5, 0.5 + 1e-11]).is_err());
    }

    #[test]
    fn support_is_exact_zero_based() {
        assert_eq!(support(&[0.0, 2.0, 0.0, 1.0]), vec![1, 3]);
        assert_eq!(support(&[1e-300, 0.0]), vec![0]);
        assert_eq!(w(&[0.0, 1.0]).support(), vec![1]);
    }

    #[test]
    fn barycenter_and_vertex() {
        assert_eq!(barycenter(4).unwrap().as_slice(), &[0.25; 4]);
        assert!(barycenter(0).is_err());
        assert_eq!(Weights::vertex(3, 1).unwrap().as_slice(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn hadamard_and_inverse() {
        assert_eq!(hadamard(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), vec![3.0, 8.0]);
        assert!(matches!(
            hadamard(&[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(comp_inverse(&[2.0, 4.0]).unwrap(), vec![0.5, 0.25]);
        assert!(matches!(
            comp_inverse(&[1.0, 0.0]),
            Err(Error::BoundaryPoint { index: 1 })
        ));
    }

    #[test]
    fn closure_examples() {
        let c = closure(&[2.0, 2.0, 5.0], &w(&[0.5, 0.5, 0.0])).unwrap();
        assert_eq!(c.as_slice(), &[0.5, 0.5, 0.0]);
        let c = closure(&[1.0, 3.0], &w(&[0.5, 0.5])).unwrap();
        assert_eq!(c.as_slice(), &[0.25, 0.75]);
        let x = [0.2, 0.3, 0.5];
        let c = closure(&x, &w(&[0.3, 0.3, 0.4])).unwrap();
        assert!(close(&c, &x, 1e-15));
    }

    #[test]
    fn closure_rejects_zero_on_support() {
        let err = closure(&[0.0, 1.0], &w(&[0.5, 0.5])).unwrap_err();
        assert_eq!(err, Error::ZeroOnSupport { index: 0 });
        // zero off the support is fine
        assert!(closure(&[0.0, 1.0], &w(&[0.0, 1.0])).is_ok());
    }

    #[test]
    fn perturb_examples() {
        let y = w(&[0.1, 0.2, 0.7]);
        let full = barycenter(3).unwrap();
        let p = perturb(&full, &y, &full).unwrap();
        assert!(close(&p, &y, 1e-15));
        let p = perturb(&[0.25, 0.75], &[0.75, 0.25], &barycenter(2).unwrap()).unwrap();
        assert!(close(&p, &[0.5, 0.5], 1e-15));
        let p = perturb(&[0.5, 0.5], &[1.0 / 3.0, 2.0 / 3.0], &barycenter(2).unwrap()).unwrap();
        assert!(close(&p, &[1.0 / 3.0, 2.0 / 3.0], 1e-15));
    }

    #[test]
    fn subtract_examples() {
        let full = barycenter(3).unwrap();
        let x = w(&[0.2, 0.3, 0.5]);
        let d = subtract(&x, &x, &full).unwrap();
        assert!(close(&d, &full, 1e-15));

        let half = barycenter(2).unwrap();
        let d = subtract(&[0.5, 0.5], &[1.0 / 3.0, 2.0 / 3.0], &half).unwrap();
        assert!(close(&d, &[2.0 / 3.0, 1.0 / 3.0], 1e-15));
        // oracle direction: perturbing the difference back recovers x
        let back = perturb(&[2.0 / 3.0, 1.0 / 3.0], &[1.0 / 3.0, 2.0 / 3.0], &half).unwrap();
        assert!(close(&back, &[0.5, 0.5], 1e-15));
    }

    #[test]
    fn subtract_then_perturb_round_trips_on_partial_support() {
        let reference = w(&[0.4, 0.0, 0.6]);
        let x = [0.3, 0.0, 0.9];
        let y = [0.2, 0.5, 0.1];
        let d = subtract(&x, &y, &reference).unwrap();
        let back = perturb(&d, &y, &reference).unwrap();
        let expected = closure(&x, &reference).unwrap();
        assert!(close(&back, &expected, 1e-15));
    }

    #[test]
    fn power_examples() {
        let x = w(&[1.0 / 3.0, 2.0 / 3.0]);
        assert!(close(&power(1.0, &x).unwrap(), &x, 1e-15));
        assert!(close(&power(0.0, &x).unwrap(), &[0.5, 0.5], 1e-15));
        assert!(close(&power(2.0, &x).unwrap(), &[0.2, 0.8], 1e-15));
        assert!(matches!(
            power(2.0, &w(&[0.0, 1.0])),
            Err(Error::BoundaryPoint { index: 0 })
        ));
    }

    #[test]
    fn composite_examples() {
        let p = w(&[0.2, 0.8]);
        let spec = CompositeSpec::new(w(&[1.0]), vec![p.clone()], None).unwrap();
        assert_eq!(composite(&spec).unwrap(), p);

        let spec = CompositeSpec::new(w(&[0.5, 0.5]), vec![w(&[1.0]), w(&[0.5, 0.5])], None).unwrap();
        assert_eq!(composite(&spec).unwrap().as_slice(), &[0.5, 0.25, 0.25]);

        let spec = CompositeSpec::new(barycenter(3).unwrap(), vec![barycenter(2).unwrap(); 3], None).unwrap();
        assert!(close(&composite(&spec).unwrap(), &[1.0 / 6.0; 6], 1e-15));
    }

    #[test]
    fn composite_spec_validation() {
        assert!(matches!(
            CompositeSpec::new(w(&[0.5, 0.5]), vec![w(&[1.0])], None),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            CompositeSpec::new(w(&[0.5, 0.5]), vec![w(&[1.0]), w(&[1.0])], Some(vec![1.0, 0.0])),
            Err(Error::DomainViolation(_))
        ));
        // a zero scale is allowed off the outer support
        assert!(CompositeSpec::new(w(&[1.0, 0.0]), vec![w(&[1.0]), w(&[1.0])], Some(vec![2.0, 0.0])).is_ok());
    }
}

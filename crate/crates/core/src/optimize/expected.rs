use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::egr::gamma_unchecked;
use crate::error::{check_len, Error, Result};
use crate::numeric::{pairwise_sum, weighted_log_sum_exp};
use crate::simplex::{closure_exp, Weights};

/// Scenario counts at or above this are evaluated in parallel.
const PARALLEL_SCENARIOS: usize = 4096;

/// A discrete distribution over log-return vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSet {
    scenarios: Vec<Vec<f64>>,
    probs: Weights,
}

impl ScenarioSet {
    /// `probs = None` means equally likely scenarios.
    pub fn new(scenarios: Vec<Vec<f64>>, probs: Option<Weights>) -> Result<Self> {
        if scenarios.is_empty() {
            return Err(Error::InvalidArgument(
                "a scenario set needs at least one scenario".into(),
            ));
        }
        let n = scenarios[0].len();
        if n == 0 {
            return Err(Error::InvalidArgument("scenarios must have at least one asset".into()));
        }
        for (k, row) in scenarios.iter().enumerate() {
            if row.len() != n {
                return Err(Error::RaggedRows {
                    row: k,
                    expected: n,
                    got: row.len(),
                });
            }
            if let Some((i, x)) = row.iter().enumerate().find(|(_, x)| !x.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "scenario {k}, asset {i}: log return {x} is not finite"
                )));
            }
        }
        let probs = match probs {
            Some(p) => {
                check_len(scenarios.len(), p.len())?;
                p
            }
            None => Weights::barycenter(scenarios.len())?,
        };
        Ok(ScenarioSet { scenarios, probs })
    }

    pub fn scenarios(&self) -> &[Vec<f64>] {
        &self.scenarios
    }

    pub fn probs(&self) -> &Weights {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.scenarios[0].len()
    }

    /// Every log return multiplied by `t`.
    pub fn scaled(&self, t: f64) -> ScenarioSet {
        ScenarioSet {
            scenarios: self
                .scenarios
                .iter()
                .map(|r| r.iter().map(|x| t * x).collect())
                .collect(),
            probs: self.probs.clone(),
        }
    }

    /// m = E[r].
    pub fn mean_log_returns(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|i| self.reduce(|k, r| self.probs[k] * r[i]))
            .collect()
    }

    /// Σ_k f(k, r_k) with a fixed tree-shaped reduction order.
    fn reduce<F: Fn(usize, &[f64]) -> f64 + Sync>(&self, f: F) -> f64 {
        let terms: Vec<f64> = if self.len() >= PARALLEL_SCENARIOS {
            self.scenarios.par_iter().enumerate().map(|(k, r)| f(k, r)).collect()
        } else {
            self.scenarios.iter().enumerate().map(|(k, r)| f(k, r)).collect()
        };
        pairwise_sum(&terms)
    }

    fn log_wealth(&self, pi: &Weights) -> Vec<f64> {
        let lse = |r: &Vec<f64>| weighted_log_sum_exp(pi, r);
        if self.len() >= PARALLEL_SCENARIOS {
            self.scenarios.par_iter().map(lse).collect()
        } else {
            self.scenarios.iter().map(lse).collect()
        }
    }
}

/// Reads scenarios from CSV: one scenario per row, one log return per
/// column. A header row is optional; when present and its last column is
/// named `prob` or `probability`, that column holds scenario probabilities.
pub fn load_scenarios(path: &Path) -> Result<ScenarioSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Io(e.to_string()))?;
    let mut rows = Vec::new();
    let mut probs = Vec::new();
    let mut with_probs = false;
    let mut width = None;
    for (idx, rec) in reader.records().enumerate() {
        let line = idx + 1;
        let rec = rec.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        if idx == 0 && rec.iter().any(|f| f.parse::<f64>().is_err()) {
            let last = rec.iter().next_back().unwrap_or("").to_ascii_lowercase();
            with_probs = last == "prob" || last == "probability";
            width = Some(rec.len());
            continue;
        }
        let expected = *width.get_or_insert(rec.len());
        if rec.len() != expected {
            return Err(Error::RaggedRows {
                row: line,
                expected,
                got: rec.len(),
            });
        }
        let values: Vec<f64> = rec
            .iter()
            .map(|f| {
                f.parse::<f64>().map_err(|e| Error::Parse {
                    line,
                    message: format!("{f:?}: {e}"),
                })
            })
            .collect::<Result<_>>()?;
        if with_probs {
            let (p, r) = values.split_last().expect("nonempty record");
            probs.push(*p);
            rows.push(r.to_vec());
        } else {
            rows.push(values);
        }
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no scenarios found".into(),
        });
    }
    let probs = if with_probs { Some(Weights::new(probs)?) } else { None };
    ScenarioSet::new(rows, probs)
}

/// J(π) = E[γ(π, r)].
pub fn expected_egr(pi: &Weights, s: &ScenarioSet) -> Result<f64> {
    check_len(s.dim(), pi.len())?;
    Ok(s.reduce(|k, r| {
        let p = s.probs[k];
        if p > 0.0 {
            p * gamma_unchecked(pi, r)
        } else {
            0.0
        }
    }))
}

/// g*(π) = E[R / ⟨π, R⟩] − m with R = e^r, evaluated through
/// exp(r_i − log⟨π, R⟩) so no gross return is ever formed.
pub fn supergradient(pi: &Weights, s: &ScenarioSet) -> Result<Vec<f64>> {
    check_len(s.dim(), pi.len())?;
    let lw = s.log_wealth(pi);
    let m = s.mean_log_returns();
    Ok((0..s.dim())
        .map(|i| s.reduce(|k, r| s.probs[k] * (r[i] - lw[k]).exp()) - m[i])
        .collect())
}

/// c_j = E[R_j / ⟨π, R⟩] − 1 − ⟨e_j − π, m⟩. Since Σ_j π_j c_j = 0,
/// J(π') ≤ J(π) + max_j c_j for every π' by concavity.
pub fn wealth_ratio_certificate(pi: &Weights, s: &ScenarioSet) -> Result<Vec<f64>> {
    let g = supergradient(pi, s)?;
    let m = s.mean_log_returns();
    let pm: f64 = pi.iter().zip(&m).map(|(a, b)| a * b).sum();
    Ok(g.into_iter().map(|x| x - 1.0 + pm).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedEgrOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Certificate evaluated every this many iterations.
    pub check_every: usize,
    /// Coordinates above this mass count as support for the equality part
    /// of the certificate.
    pub support_threshold: f64,
}

impl Default for ExpectedEgrOptions {
    fn default() -> Self {
        ExpectedEgrOptions {
            tol: 1e-6,
            max_iter: 100_000,
            check_every: 100,
            support_threshold: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectedEgrResult {
    pub pi_star: Weights,
    pub value: f64,
    pub certificate: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn certificate_holds(pi: &Weights, c: &[f64], opts: &ExpectedEgrOptions) -> bool {
    c.iter()
        .zip(pi.iter())
        .all(|(&cj, &pj)| cj <= opts.tol && (pj <= opts.support_threshold || cj.abs() <= opts.tol))
}

/// Local smoothness of J relative to the entropy at π:
/// E[((max_i w_i − min_i w_i)/2)²] with w = R/⟨π, R⟩.
fn local_curvature(lw: &[f64], s: &ScenarioSet) -> f64 {
    s.reduce(|k, r| {
        let hi = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
        let spread = (hi - lw[k]).exp() - (lo - lw[k]).exp();
        s.probs[k] * 0.25 * spread * spread
    })
}

/// Entropic mirror ascent from the barycenter. Always returns the best
/// iterate; `converged` records whether the certificate was met.
pub fn solve_expected_egr(s: &ScenarioSet, opts: ExpectedEgrOptions) -> Result<ExpectedEgrResult> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let n = s.dim();
    let full = Weights::barycenter(n)?;
    let mut pi = full.clone();
    let mut value = expected_egr(&pi, s)?;
    let mut shrink = 1.0;
    let mut best = (pi.clone(), value);
    let check_every = opts.check_every.max(1);
    for it in 0..=opts.max_iter {
        let g = supergradient(&pi, s)?;
        if it % check_every == 0 || it == opts.max_iter {
            let c = wealth_ratio_certificate(&pi, s)?;
            if certificate_holds(&pi, &c, &opts) {
                let (pi, value, c) = polish(s, pi, value, c, &opts)?;
                return Ok(ExpectedEgrResult {
                    pi_star: pi,
                    value,
                    certificate: c,
                    iterations: it,
                    converged: true,
                });
            }
            if let Some((face_pi, face_value, face_c)) = face_newton(s, &pi, value, &c, &opts)? {
                return Ok(ExpectedEgrResult {
                    pi_star: face_pi,
                    value: face_value,
                    certificate: face_c,
                    iterations: it,
                    converged: true,
                });
            }
        }
        if it == opts.max_iter {
            break;
        }
        let curvature = local_curvature(&s.log_wealth(&pi), s);
        if curvature == 0.0 {
            // every scenario is constant across assets: J ≡ 0
            let c = wealth_ratio_certificate(&pi, s)?;
            return Ok(ExpectedEgrResult {
                pi_star: pi,
                value,
                certificate: c,
                iterations: it,
                converged: true,
            });
        }
        let step = shrink / curvature;
        let logs: Vec<f64> = pi.iter().zip(&g).map(|(p, gi)| p.ln() + step * gi).collect();
        let next = closure_exp(&logs, &full)?;
        let next_value = expected_egr(&next, s)?;
        if next_value + 1e-15 * (1.0 + value.abs()) < value {
            shrink *= 0.5;
            if shrink < 1e-12 {
                break;
            }
            continue;
        }
        pi = next;
        value = next_value;
        if value >= best.1 {
            best = (pi.clone(), value);
        }
    }
    let (pi, value) = best;
    let c = wealth_ratio_certificate(&pi, s)?;
    let converged = certificate_holds(&pi, &c, &opts);
    Ok(ExpectedEgrResult {
        pi_star: pi,
        value,
        certificate: c,
        iterations: opts.max_iter,
        converged,
    })
}

/// Largest face on which Newton polishing is attempted.
const POLISH_MAX_SUPPORT: usize = 64;

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let m = b.len();
    for col in 0..m {
        let piv = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..m {
            let f = a[row][col] / a[col][col];
            let (top, bottom) = a.split_at_mut(row);
            for (x, y) in bottom[0][col..m].iter_mut().zip(&top[col][col..m]) {
                *x -= f * y;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; m];
    for row in (0..m).rev() {
        let tail: f64 = (row + 1..m).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Some(x)
}

fn support_spread(pi: &Weights, c: &[f64], threshold: f64) -> f64 {
    c.iter()
        .zip(pi.iter())
        .filter(|(_, p)| **p > threshold)
        .map(|(x, _)| x.abs())
        .fold(0.0, f64::max)
}

/// Damped Newton on faces of the simplex, tried at every certificate check.
/// Mirror ascent is slow when the optimum puts little mass on some asset:
/// that mass only moves geometrically. Two faces are tried, the current
/// support and the support without coordinates whose entry is below −tol
/// (those carry no mass at the optimum). A face result is returned only if
/// the full certificate holds there.
fn face_newton(
    s: &ScenarioSet,
    pi: &Weights,
    value: f64,
    c: &[f64],
    opts: &ExpectedEgrOptions,
) -> Result<Option<(Weights, f64, Vec<f64>)>> {
    let current: Vec<usize> = (0..pi.len()).filter(|&j| pi[j] > opts.support_threshold).collect();
    let reduced: Vec<usize> = current.iter().copied().filter(|&j| c[j] >= -opts.tol).collect();
    let mut faces = vec![current.clone()];
    if reduced.len() < current.len() {
        faces.push(reduced);
    }
    for support in faces {
        if support.is_empty() || support.len() > POLISH_MAX_SUPPORT {
            continue;
        }
        if let Some(found) = newton_on_face(s, pi, value, &support, opts)? {
            return Ok(Some(found));
        }
    }
    Ok(None)
}

fn newton_on_face(
    s: &ScenarioSet,
    pi: &Weights,
    value: f64,
    support: &[usize],
    opts: &ExpectedEgrOptions,
) -> Result<Option<(Weights, f64, Vec<f64>)>> {
    let mut w = vec![0.0; pi.len()];
    for &j in support {
        w[j] = pi[j];
    }
    let mut face = crate::simplex::normalize(&w)?;
    let mut face_value = expected_egr(&face, s)?;
    for _ in 0..50 {
        let g = supergradient(&face, s)?;
        let m = support.len();
        let mean = support.iter().map(|&i| g[i]).sum::<f64>() / m as f64;
        if m < 2 || support.iter().all(|&i| (g[i] - mean).abs() <= 1e-15) {
            break;
        }
        let Some(step) = newton_direction(s, &face, support, &g) else {
            break;
        };
        let mut t = 1.0;
        let mut moved = false;
        while t > 1e-10 {
            let mut cand = face.to_vec();
            for (x, &i) in support.iter().enumerate() {
                cand[i] += t * step[x];
            }
            if support.iter().all(|&i| cand[i] > 0.0) {
                let cand = crate::simplex::normalize(&cand)?;
                let cand_value = expected_egr(&cand, s)?;
                if cand_value >= face_value {
                    moved = cand_value > face_value || t == 1.0;
                    face = cand;
                    face_value = cand_value;
                    break;
                }
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    let face_c = wealth_ratio_certificate(&face, s)?;
    if face_value >= value - 1e-15 * (1.0 + value.abs()) && certificate_holds(&face, &face_c, opts) {
        Ok(Some((face, face_value, face_c)))
    } else {
        Ok(None)
    }
}

/// Newton direction for J restricted to the face on `support`, from the KKT
/// system [H 1; 1ᵀ 0] [Δ; −ν] = [−g; 0] with H = −E[w wᵀ].
fn newton_direction(s: &ScenarioSet, pi: &Weights, support: &[usize], g: &[f64]) -> Option<Vec<f64>> {
    let m = support.len();
    let lw = s.log_wealth(pi);
    let mut a = vec![vec![0.0; m + 1]; m + 1];
    for (x, &i) in support.iter().enumerate() {
        for (y, &j) in support.iter().enumerate().skip(x) {
            let h = -s.reduce(|k, r| s.probs[k] * (r[i] - lw[k]).exp() * (r[j] - lw[k]).exp());
            a[x][y] = h;
            a[y][x] = h;
        }
        a[x][m] = 1.0;
        a[m][x] = 1.0;
    }
    let mut rhs: Vec<f64> = support.iter().map(|&i| -g[i]).collect();
    rhs.push(0.0);
    solve_dense(a, rhs)
}

/// Newton steps on the face spanned by the detected support, solving the
/// equality part of the certificate to rounding level. A step is kept only
/// if it shrinks the certificate without lowering J.
fn polish(
    s: &ScenarioSet,
    mut pi: Weights,
    mut value: f64,
    mut c: Vec<f64>,
    opts: &ExpectedEgrOptions,
) -> Result<(Weights, f64, Vec<f64>)> {
    let support: Vec<usize> = (0..pi.len()).filter(|&j| pi[j] > opts.support_threshold).collect();
    let m = support.len();
    if !(2..=POLISH_MAX_SUPPORT).contains(&m) {
        return Ok((pi, value, c));
    }
    for _ in 0..20 {
        let spread = support_spread(&pi, &c, opts.support_threshold);
        if spread <= 1e-14 {
            break;
        }
        let g = supergradient(&pi, s)?;
        let Some(step) = newton_direction(s, &pi, &support, &g) else {
            break;
        };
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-4 {
            let mut w = pi.to_vec();
            for (x, &i) in support.iter().enumerate() {
                w[i] += t * step[x];
            }
            if support.iter().all(|&i| w[i] > 0.0) {
                let total: f64 = w.iter().sum();
                let cand = Weights::new(w.iter().map(|v| v / total).collect())?;
                let cand_value = expected_egr(&cand, s)?;
                let cand_c = wealth_ratio_certificate(&cand, s)?;
                let better = support_spread(&cand, &cand_c, opts.support_threshold) < spread;
                if better
                    && cand_value >= value - 1e-15 * (1.0 + value.abs())
                    && certificate_holds(&cand, &cand_c, opts)
                {
                    pi = cand;
                    value = cand_value;
                    c = cand_c;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok((pi, value, c))
}

/// Maximizes J to certificate tolerance `tol`; NoConvergence when the
/// iteration budget runs out.
pub fn maximize_expected_egr(s: &ScenarioSet, tol: f64) -> Result<ExpectedEgrResult> {
    let res = solve_expected_egr(
        s,
        ExpectedEgrOptions {
            tol,
            ..Default::default()
        },
    )?;
    if !res.converged {
        let worst = res.certificate.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        return Err(Error::NoConvergence {
            iterations: res.iterations,
            reason: format!("certificate not met; best iterate has max certificate {worst:e}"),
        });
    }
    Ok(res)
}

fn second_moments(s: &ScenarioSet) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = s.dim();
    let diag: Vec<f64> = (0..n).map(|i| s.reduce(|k, r| s.probs[k] * r[i] * r[i])).collect();
    let m2: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| s.reduce(|k, r| s.probs[k] * r[i] * r[j])).collect())
        .collect();
    (diag, m2)
}

/// ½(Σ π_i E[r_i²] − Σ_ij π_i π_j E[r_i r_j]).
pub fn quadratic_approx_objective(pi: &Weights, s: &ScenarioSet) -> Result<f64> {
    check_len(s.dim(), pi.len())?;
    let (diag, m2) = second_moments(s);
    Ok(quad_value(pi, &diag, &m2))
}

fn quad_value(pi: &[f64], diag: &[f64], m2: &[Vec<f64>]) -> f64 {
    let lin: f64 = pi.iter().zip(diag).map(|(a, b)| a * b).sum();
    let quad: f64 = (0..pi.len())
        .map(|i| pi[i] * m2[i].iter().zip(pi).map(|(a, b)| a * b).sum::<f64>())
        .sum();
    0.5 * (lin - quad)
}

/// Euclidean projection onto the simplex (sort-based).
fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (k as f64 + 1.0);
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Maximizer over Δn of the second-order approximation of J, by projected
/// gradient ascent.
pub fn quadratic_approx_solution(s: &ScenarioSet) -> Result<Weights> {
    const BUDGET: usize = 1_000_000;
    let n = s.dim();
    let (diag, m2) = second_moments(s);
    let trace: f64 = (0..n).map(|i| m2[i][i]).sum();
    let mut pi = vec![1.0 / n as f64; n];
    if trace == 0.0 {
        return Weights::new(pi);
    }
    let step = 1.0 / trace;
    for _ in 0..BUDGET {
        let grad: Vec<f64> = (0..n)
            .map(|i| 0.5 * diag[i] - m2[i].iter().zip(&pi).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        let moved: Vec<f64> = pi.iter().zip(&grad).map(|(p, g)| p + step * g).collect();
        let next = project_simplex(&moved);
        let change = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        pi = next;
        if change <= 1e-15 {
            return crate::simplex::normalize(&pi);
        }
    }
    Err(Error::NoConvergence {
        iterations: BUDGET,
        reason: "projected gradient did not settle".into(),
    })
}

/// (E[log(⟨π,R⟩/⟨π*,R⟩)], log(1 + ⟨π − π*, m⟩)); the first is at most the
/// second whenever π* maximizes J. The right side is −∞ when its argument
/// is not positive.
pub fn relative_growth_bound_check(pi: &Weights, pi_star: &Weights, s: &ScenarioSet) -> Result<(f64, f64)> {
    check_len(s.dim(), pi.len())?;
    check_len(s.dim(), pi_star.len())?;
    let a = s.log_wealth(pi);
    let b = s.log_wealth(pi_star);
    let lhs = s.reduce(|k, _| s.probs[k] * (a[k] - b[k]));
    let m = s.mean_log_returns();
    let arg: f64 = pi
        .iter()
        .zip(pi_star.iter())
        .zip(&m)
        .map(|((x, y), mi)| (x - y) * mi)
        .sum();
    let rhs = if arg > -1.0 { arg.ln_1p() } else { f64::NEG_INFINITY };
    Ok((lhs, rhs))
}

//! Adaptive Gauss–Legendre quadrature and integration against the Aitchison
//! measure on the open 2-simplex.

use std::sync::OnceLock;

use crate::error::{Error, Result};

const ORDER: usize = 20;
const MAX_DEPTH: u32 = 48;

/// Nodes and weights on [-1, 1], found by Newton iteration on P_ORDER.
fn rule() -> &'static ([f64; ORDER], [f64; ORDER]) {
    static RULE: OnceLock<([f64; ORDER], [f64; ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let mut nodes = [0.0; ORDER];
        let mut weights = [0.0; ORDER];
        let n = ORDER as f64;
        for i in 0..ORDER {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=ORDER {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

fn fixed<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (nodes, weights) = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    nodes
        .iter()
        .zip(weights)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

fn refine<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> Result<f64> {
    let m = 0.5 * (a + b);
    let left = fixed(f, a, m);
    let right = fixed(f, m, b);
    let halves = left + right;
    if !halves.is_finite() {
        return Err(Error::QuadratureFailure(format!(
            "integrand is not finite on [{a}, {b}]"
        )));
    }
    if (halves - whole).abs() <= tol.max(4.0 * f64::EPSILON * halves.abs()) {
        return Ok(halves);
    }
    if depth == 0 {
        return Err(Error::QuadratureFailure(format!(
            "subdivision budget exhausted on [{a}, {b}]"
        )));
    }
    Ok(refine(f, a, m, left, 0.5 * tol, depth - 1)? + refine(f, m, b, right, 0.5 * tol, depth - 1)?)
}

/// ∫_a^b f with absolute tolerance `tol`, comparing each panel against its
/// two halves.
pub fn adaptive_gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let whole = fixed(&f, a, b);
    refine(&f, a, b, whole, tol, MAX_DEPTH)
}

const CORE_EDGE: f64 = 0.01;
/// Smallest strip edge tried before giving up on a tail.
const TAIL_FLOOR: f64 = 1e-300;

/// Sum of the strips `[ε/10, ε]` for ε = CORE_EDGE, CORE_EDGE/10, ... of
/// `g(u)` in the variable u = ln(ε'), stopping once the current strip and a
/// geometric extrapolation of the rest fall below `tol / 10`.
fn tail<G: Fn(f64) -> f64>(g: G, tol: f64) -> Result<f64> {
    let mut total = 0.0;
    let mut prev = f64::INFINITY;
    let mut hi = CORE_EDGE.ln();
    let step = 10f64.ln();
    while hi.exp() > TAIL_FLOOR {
        let lo = hi - step;
        let c = adaptive_gauss_legendre(&g, lo, hi, tol / 100.0)?;
        total += c;
        let ratio = c.abs() / prev;
        if c.abs() < tol / 10.0 && ratio < 0.9 {
            let rest = c.abs() * ratio / (1.0 - ratio);
            if rest < tol / 10.0 {
                return Ok(total);
            }
        }
        if c == 0.0 && prev == 0.0 {
            return Ok(total);
        }
        prev = c.abs();
        hi = lo;
    }
    Err(Error::QuadratureFailure(
        "tail contribution did not fall below tolerance; the integral may diverge".into(),
    ))
}

/// ∫ f dλ₂ over the open 2-simplex, where dλ₂ = dy₁ / (√2 y₁ y₂) is the
/// Aitchison measure in the chart y₁ ↦ (y₁, 1 − y₁).
///
/// `f` receives both coordinates, each computed to full relative precision
/// near its own boundary. The core (CORE_EDGE, 1 − CORE_EDGE) is integrated
/// in y₁; each tail is integrated in the log of the small coordinate, one
/// decade at a time.
pub fn aitchison_quadrature<F: Fn(f64, f64) -> f64>(f: F, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let sqrt2 = std::f64::consts::SQRT_2;
    let core = adaptive_gauss_legendre(
        |y1| {
            let y2 = 1.0 - y1;
            f(y1, y2) / (sqrt2 * y1 * y2)
        },
        CORE_EDGE,
        1.0 - CORE_EDGE,
        tol / 10.0,
    )?;
    // dy/(y(1−y)) = du/(1−e^u) with y = e^u
    let left = tail(
        |u| {
            let small = u.exp();
            let big = -u.exp_m1();
            f(small, big) / (sqrt2 * big)
        },
        tol,
    )?;
    let right = tail(
        |u| {
            let small = u.exp();
            let big = -u.exp_m1();
            f(big, small) / (sqrt2 * big)
        },
        tol,
    )?;
    Ok(core + left + right)
}

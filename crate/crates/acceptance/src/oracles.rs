//! Brute-force reference computations, written without the library's
//! numerical machinery so that agreement means something.

/// ln Σ π_i e^{r_i} − Σ π_i r_i, summed directly over the support.
pub fn gamma_naive(pi: &[f64], r: &[f64]) -> f64 {
    let am: f64 = pi
        .iter()
        .zip(r)
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, x)| p * x.exp())
        .sum();
    let mean: f64 = pi.iter().zip(r).filter(|(p, _)| **p > 0.0).map(|(p, x)| p * x).sum();
    am.ln() - mean
}

/// Σ_k P_k γ(π, r_k) for equally likely scenarios.
pub fn expected_gamma_naive(pi: &[f64], scenarios: &[Vec<f64>]) -> f64 {
    scenarios.iter().map(|r| gamma_naive(pi, r)).sum::<f64>() / scenarios.len() as f64
}

/// Σ p_i ln(p_i / q_i) over supp(p).
pub fn kl_naive(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(a, _)| **a > 0.0)
        .map(|(a, b)| a * (a / b).ln())
        .sum()
}

/// Every point of Δn whose coordinates are multiples of 1/steps.
pub fn simplex_grid(n: usize, steps: usize) -> Vec<Vec<f64>> {
    fn rec(left: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(left - k, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut ints = Vec::new();
    rec(steps, n, &mut Vec::with_capacity(n), &mut ints);
    ints.into_iter()
        .map(|v| v.into_iter().map(|k| k as f64 / steps as f64).collect())
        .collect()
}

/// Grid maximum of `f` over Δn, then pairwise mass transfers with a
/// shrinking step until no transfer improves `f`.
pub fn simplex_brute_max<F: Fn(&[f64]) -> f64>(f: F, n: usize, steps: usize) -> (Vec<f64>, f64) {
    let mut best = (vec![1.0 / n as f64; n], f64::NEG_INFINITY);
    for p in simplex_grid(n, steps) {
        let v = f(&p);
        if v > best.1 {
            best = (p, v);
        }
    }
    let (mut x, mut fx) = best;
    let mut step = 1.0 / steps as f64;
    while step > 1e-14 {
        let mut improved = true;
        while improved {
            improved = false;
            for i in 0..n {
                for j in 0..n {
                    if i == j || x[j] == 0.0 {
                        continue;
                    }
                    let t = step.min(x[j]);
                    let mut y = x.clone();
                    y[i] += t;
                    y[j] -= t;
                    if t == x[j] {
                        y[j] = 0.0;
                    }
                    let fy = f(&y);
                    if fy > fx {
                        x = y;
                        fx = fy;
                        improved = true;
                    }
                }
            }
        }
        step *= 0.5;
    }
    (x, fx)
}

/// Largest grid value of `f` on [a, b] followed by golden-section search on
/// the two neighbouring cells. `f` must be unimodal near the grid maximum.
pub fn grid_golden_max<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, step: f64) -> (f64, f64) {
    let count = ((b - a) / step).round() as usize;
    let mut best = (a, f(a));
    for k in 1..=count {
        let x = (a + k as f64 * step).min(b);
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    let (mut lo, mut hi) = ((best.0 - step).max(a), (best.0 + step).min(b));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if hi - lo < 1e-15 {
            break;
        }
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    let x = 0.5 * (lo + hi);
    let fx = f(x);
    if fx >= best.1 {
        (x, fx)
    } else {
        best
    }
}

/// Root of a monotone function on [lo, hi] where `inside(lo) != inside(hi)`.
pub fn bisect_boundary<F: Fn(f64) -> bool>(inside: F, mut lo: f64, mut hi: f64) -> f64 {
    let lo_in = inside(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if inside(mid) == lo_in {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo_in {
        lo
    } else {
        hi
    }
}

/// max ⟨q − π, r⟩ over two-point q with H(q || π) ≤ η: grid over q₁ with
/// the given step, plus bisection at each crossing of the constraint.
pub fn two_point_constrained_max(pi: [f64; 2], r: [f64; 2], eta: f64, step: f64) -> f64 {
    let obj = |q1: f64| (q1 - pi[0]) * r[0] + (1.0 - q1 - pi[1]) * r[1];
    let feasible = |q1: f64| kl_naive(&[q1, 1.0 - q1], &pi) <= eta;
    let count = (1.0 / step).round() as usize;
    let mut best = f64::NEG_INFINITY;
    let mut prev: Option<(f64, bool)> = None;
    for k in 0..=count {
        let q1 = (k as f64 * step).min(1.0);
        let ok = feasible(q1);
        if ok {
            best = best.max(obj(q1));
        }
        if let Some((p, was)) = prev {
            if was != ok {
                let edge = bisect_boundary(feasible, p, q1);
                best = best.max(obj(edge));
            }
        }
        prev = Some((q1, ok));
    }
    best
}

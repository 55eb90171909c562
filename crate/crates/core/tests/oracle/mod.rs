//! Reference integrals computed independently of the library: composite
//! Gauss–Legendre on explicit panels, directly in the wavenumber `k`.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    rule
}

/// `∫ f` over consecutive panels `edges`, each split into `sub` equal parts.
pub fn composite<F: Fn(f64) -> f64>(f: F, edges: &[f64], sub: usize, rule: &[(f64, f64)]) -> f64 {
    let mut total = 0.0;
    for w in edges.windows(2) {
        let h = (w[1] - w[0]) / sub as f64;
        for s in 0..sub {
            let a = w[0] + h * s as f64;
            let mid = a + 0.5 * h;
            total += rule.iter().map(|&(x, wt)| wt * f(mid + 0.5 * h * x)).sum::<f64>() * 0.5 * h;
        }
    }
    total
}

/// Edges refining geometrically towards `x0` from `x0 + scale·4^i`, ending at `end`.
fn graded(x0: f64, scale: f64, end: f64) -> Vec<f64> {
    let mut edges = vec![x0];
    let mut s = scale * 1e-6;
    while x0 + s < end {
        edges.push(x0 + s);
        s *= 4.0;
    }
    edges.push(end);
    edges
}

/// Per-mode Lamb shift `2g²Ω² PV∫₀^∞ dk / (ω_k (E − ω_k))`, `ω_k = sqrt(Ω² + k²)`.
///
/// Open channels subtract the pole at `k_j` on `[0, 2k_j]`; the tail beyond
/// `K` uses `k = K/s`.
pub fn delta_k_grid(energy: f64, cutoff: f64, g_squared: f64) -> f64 {
    let rule = gauss_legendre(20);
    let omega = |k: f64| (cutoff * cutoff + k * k).sqrt();
    let integrand = |k: f64| {
        let w = omega(k);
        1.0 / (w * (energy - w))
    };
    let tail = |big_k: f64| {
        let f = |s: f64| {
            if s == 0.0 {
                return -1.0 / big_k;
            }
            let k = big_k / s;
            integrand(k) * big_k / (s * s)
        };
        composite(f, &[0.0, 0.25, 0.5, 0.75, 1.0], 8, &rule)
    };
    let value = if energy > cutoff {
        let kj = ((energy - cutoff) * (energy + cutoff)).sqrt();
        // E − ω = −(k − k_j)(k + k_j)/(ω + E)
        let h = |k: f64| {
            let w = omega(k);
            -(w + energy) / (w * (k + kj))
        };
        let hj = h(kj);
        let smooth = |k: f64| {
            let d = k - kj;
            if d == 0.0 {
                return 0.0;
            }
            (h(k) - hj) / d
        };
        let scale = kj.min(cutoff);
        let mut edges = graded(0.0, scale, kj);
        let upper: Vec<f64> = graded(kj, scale, 2.0 * kj).into_iter().skip(1).collect();
        edges.extend(upper);
        edges.dedup();
        composite(smooth, &edges, 4, &rule) + tail(2.0 * kj)
    } else {
        let kappa = ((cutoff - energy) * (cutoff + energy)).sqrt();
        let big_k = 2.0 * cutoff;
        composite(integrand, &graded(0.0, kappa, big_k), 4, &rule) + tail(big_k)
    };
    2.0 * g_squared * cutoff * cutoff * value
}

/// Per-mode decay rate with the energy delta broadened to a Gaussian of width
/// `eps`: `2πg²Ω² ∫ dω δ_eps(E − ω) / sqrt(ω² − Ω²)`.
pub fn gamma_broadened(energy: f64, cutoff: f64, g_squared: f64, eps: f64) -> f64 {
    let rule = gauss_legendre(20);
    let lo = (energy - 14.0 * eps).max(cutoff);
    if lo >= energy + 14.0 * eps {
        return 0.0;
    }
    let f = |w: f64| {
        let x = (energy - w) / eps;
        let gauss = (-0.5 * x * x).exp() / ((2.0 * PI).sqrt() * eps);
        gauss / ((w - cutoff) * (w + cutoff)).sqrt()
    };
    2.0 * PI * g_squared * cutoff * cutoff * composite(f, &[lo, energy, energy + 14.0 * eps], 64, &rule)
}

/// Richardson extrapolation of `F(eps)` to `eps → 0` assuming an even series
/// in `eps`, from `eps, eps/2, …, eps/2^(levels−1)`.
pub fn richardson_even<F: Fn(f64) -> f64>(f: F, eps: f64, levels: usize) -> f64 {
    let mut table: Vec<f64> = (0..levels).map(|i| f(eps / 2f64.powi(i as i32))).collect();
    for order in 1..levels {
        let factor = 4f64.powi(order as i32);
        for i in (order..levels).rev() {
            table[i] = (factor * table[i] - table[i - 1]) / (factor - 1.0);
        }
    }
    table[levels - 1]
}

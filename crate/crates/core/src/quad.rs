//! Gauss rules, adaptive quadrature and finite-difference weights.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

/// Nodes and weights of a quadrature rule on a fixed reference interval.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn legendre_uncached(n: usize) -> Rule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

/// Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> Arc<Rule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Rule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    guard.entry(n).or_insert_with(|| Arc::new(legendre_uncached(n))).clone()
}

/// Gauss-Jacobi rule for ∫₀¹ s^a f(s) ds, a > -1 (Golub-Welsch).
pub fn gauss_jacobi_unit(n: usize, a: f64) -> Arc<Rule> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), Arc<Rule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (n, a.to_bits());
    if let Some(r) = cache.lock().expect("quadrature cache poisoned").get(&key) {
        return r.clone();
    }
    let rule = Arc::new(jacobi_uncached(n, a));
    cache.lock().expect("quadrature cache poisoned").insert(key, rule.clone());
    rule
}

fn jacobi_uncached(n: usize, a: f64) -> Rule {
    if a == 0.0 {
        let gl = legendre_uncached(n);
        return Rule {
            nodes: gl.nodes.iter().map(|x| 0.5 * (x + 1.0)).collect(),
            weights: gl.weights.iter().map(|w| 0.5 * w).collect(),
        };
    }
    // Jacobi (alpha = 0, beta = a) on [-1, 1], weight (1+x)^a.
    let (al, be) = (0.0f64, a);
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let s = 2.0 * kf + al + be;
        m[(k, k)] = if k == 0 {
            (be - al) / (al + be + 2.0)
        } else {
            (be * be - al * al) / (s * (s + 2.0))
        };
        if k >= 1 {
            let num = 4.0 * kf * (kf + al) * (kf + be) * (kf + al + be);
            let den = s * s * (s + 1.0) * (s - 1.0);
            let b = (num / den).sqrt();
            m[(k, k - 1)] = b;
            m[(k - 1, k)] = b;
        }
    }
    let eig = SymmetricEigen::new(m);
    let mu0 = 2f64.powf(al + be + 1.0)
        * (crate::special::ln_gamma(al + 1.0) + crate::special::ln_gamma(be + 1.0)
            - crate::special::ln_gamma(al + be + 2.0))
        .exp();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let scale = 2f64.powf(-a - 1.0);
    Rule {
        nodes: pairs.iter().map(|p| 0.5 * (p.0 + 1.0)).collect(),
        weights: pairs.iter().map(|p| p.1 * scale).collect(),
    }
}

/// Fixed-order Gauss-Legendre on [a, b].
pub fn gl_fixed<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let r = gauss_legendre(n);
    let (h, c) = (0.5 * (b - a), 0.5 * (b + a));
    let mut s = 0.0;
    for (x, w) in r.nodes.iter().zip(&r.weights) {
        s += w * f(c + h * x);
    }
    s * h
}

/// Fixed-order Gauss-Legendre for complex integrands on [a, b].
pub fn gl_fixed_c<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, n: usize) -> Complex64 {
    let r = gauss_legendre(n);
    let (h, c) = (0.5 * (b - a), 0.5 * (b + a));
    let mut s = Complex64::new(0.0, 0.0);
    for (x, w) in r.nodes.iter().zip(&r.weights) {
        s += f(c + h * x) * *w;
    }
    s * h
}

/// Adaptive Gauss-Legendre (20 vs 2×20 points) on a finite interval.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    integrate_c(|x| Complex64::new(f(x), 0.0), a, b, tol).re
}

/// Complex-valued adaptive integration; absolute tolerance scaled by the running magnitude.
pub fn integrate_c<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, tol: f64) -> Complex64 {
    let whole = gl_fixed_c(&f, a, b, 20);
    adapt(&f, a, b, whole, tol, 0)
}

fn adapt<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    whole: Complex64,
    tol: f64,
    depth: usize,
) -> Complex64 {
    let m = 0.5 * (a + b);
    let l = gl_fixed_c(f, a, m, 20);
    let r = gl_fixed_c(f, m, b, 20);
    let both = l + r;
    if (both - whole).norm() <= tol * both.norm().max(1e-300) || depth >= 40 || (b - a).abs() < 1e-14 {
        return both;
    }
    adapt(f, a, m, l, tol, depth + 1) + adapt(f, m, b, r, tol, depth + 1)
}

/// Integral over [a, ∞) by doubling panels until a panel contributes below `tol` relative.
pub fn integrate_to_inf<F: Fn(f64) -> f64>(f: F, a: f64, first: f64, tol: f64) -> f64 {
    let mut lo = a;
    let mut w = first;
    let mut total = 0.0;
    for _ in 0..200 {
        let part = integrate(&f, lo, lo + w, tol);
        total += part;
        if part.abs() <= tol * total.abs() && w > first {
            break;
        }
        lo += w;
        w *= 2.0;
    }
    total
}

/// Finite-difference weights (Fornberg): derivative orders 0..=m at z on nodes x.
/// Returns c[k][j] = weight of f(x_j) for the k-th derivative.
pub fn fornberg(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials() {
        let r = gauss_legendre(10);
        let s: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
    }

    #[test]
    fn jacobi_weight_moments() {
        for &a in &[-0.5, -2.0 / 3.0, 0.5, 1.0 / 3.0, 2.5] {
            let r = gauss_jacobi_unit(12, a);
            for k in 0..10 {
                let s: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(k)).sum();
                let exact = 1.0 / (a + k as f64 + 1.0);
                assert!((s - exact).abs() < 1e-13 * exact.max(1.0), "a={a} k={k} {s} {exact}");
            }
        }
    }

    #[test]
    fn fornberg_third_derivative_central() {
        let x: Vec<f64> = (-4..=4).map(|i| i as f64).collect();
        let c = fornberg(0.0, &x, 3);
        let want = [-7.0 / 240.0, 0.3, -169.0 / 120.0, 61.0 / 30.0, 0.0, -61.0 / 30.0, 169.0 / 120.0, -0.3, 7.0 / 240.0];
        for (a, b) in c[3].iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn semi_infinite() {
        let v = integrate_to_inf(|x| (-x).exp(), 0.0, 1.0, 1e-13);
        assert!((v - 1.0).abs() < 1e-12);
    }
}

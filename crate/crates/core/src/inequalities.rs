//! Evaluators for the elementary inequalities behind the norm estimates.
//! Each returns the two sides so tests can assert them pointwise.

use crate::problem::SymbolPolynomial;
use crate::quad::integrate;
use crate::special::{gamma, lower_gamma_unit};
use num_complex::Complex64;

/// Integral over [0,1] of a function with boundary layers of width `w` at
/// both ends: geometric panels toward each end.
fn layered(f: impl Fn(f64) -> f64, w: f64) -> f64 {
    let w = w.clamp(1e-14, 0.5);
    let mut cuts = vec![0.0];
    let mut x = w;
    while x < 0.5 {
        cuts.push(x);
        x *= 2.0;
    }
    cuts.push(0.5);
    let mut pts = cuts.clone();
    pts.extend(cuts.iter().rev().skip(1).map(|c| 1.0 - c));
    pts.windows(2).map(|p| integrate(&f, p[0], p[1], 1e-12)).sum()
}

/// (1+μ^α) ∫₀¹ s^{α-1} e^{-μs} ds and 2Γ(α).
pub fn incomplete_gamma_bound(alpha: f64, mu: f64) -> (f64, f64) {
    ((1.0 + mu.powf(alpha)) * lower_gamma_unit(alpha, mu), 2.0 * gamma(alpha))
}

/// μ^α ν^α ∫₀¹ e^{-νμ[1-(1-s)^m]} s^{α-1} / [1+μ²(1-s)²]^σ ds and 8(2^α+1)Γ(α)(1+μ²)^{-σ}.
pub fn damped_moment_bound(alpha: f64, mu: f64, nu: f64, m: u32, sigma: u32) -> (f64, f64) {
    // s = w^{1/α} absorbs s^{α-1} ds = dw/α.
    let f = |w: f64| {
        let s = w.max(0.0).powf(1.0 / alpha);
        let e = (-nu * mu * (1.0 - (1.0 - s).powi(m as i32))).exp();
        e / (1.0 + mu * mu * (1.0 - s).powi(2)).powi(sigma as i32) / alpha
    };
    let width = (1.0 / (mu * nu)).powf(alpha).min(0.5);
    let lhs = (mu * nu).powf(alpha) * layered(f, width);
    let rhs = 8.0 * (2f64.powf(alpha) + 1.0) * gamma(alpha) * (1.0 + mu * mu).powi(-(sigma as i32));
    (lhs, rhs)
}

/// (1+p^n) e^{-νp^n} / p · ∫₀^p e^{ν s^n + ν (p-s)^n} ds, the quantity bounded by C.
pub fn exp_convolution_ratio(p: f64, n: u32, nu: f64) -> f64 {
    let a = nu * p.powi(n as i32);
    let f = |u: f64| (a * (u.powi(n as i32) + (1.0 - u).powi(n as i32) - 1.0)).exp();
    let width = (1.0 / (a * n as f64)).min(0.5);
    (1.0 + p.powi(n as i32)) * layered(f, width)
}

/// sup over 0 < p ≤ p_max of `exp_convolution_ratio`: the constant C of the bound.
pub fn exp_convolution_constant(n: u32, nu: f64, p_max: f64) -> f64 {
    (0..=200)
        .map(|i| 1e-3 * (p_max / 1e-3).powf(i as f64 / 200.0))
        .map(|p| exp_convolution_ratio(p, n, nu))
        .fold(0.0, f64::max)
}

/// |P_j(-p)| / Σ(1+|p|^n) at a point, so the bound's C is the sup.
pub fn symbol_growth_ratio(symbol: &SymbolPolynomial, j: usize, p: Complex64) -> f64 {
    symbol.at_minus_p_1d(j, p).norm() / (1.0 + p.norm().powi(symbol.n as i32))
}

/// Left side of the Duhamel growth bound, divided by its exponential and
/// ν factors; to be compared with `duhamel_growth_constant`.
pub fn duhamel_growth_ratio(symbol: &SymbolPolynomial, p: f64, t: f64, nu: f64, lp: u32, c2: f64) -> f64 {
    let n = symbol.n as i32;
    let q = p + p.powi(n);
    let a = symbol.at_minus_p_1d(0, Complex64::new(p, 0.0)).norm();
    // ∫₀ᵗ e^{a(t-τ) + ν(τ+1)q} dτ, scaled by e^{-νq(t+1) - C₂t}.
    let scale = -nu * q * (t + 1.0) - c2 * t;
    let f = |tau: f64| (a * (t - tau) + nu * (tau + 1.0) * q + scale).exp();
    let integral = if t > 0.0 { integrate(f, 0.0, t, 1e-12) } else { 0.0 };
    p.powi(lp as i32) * integral * (nu - c2).powf(lp as f64 / n as f64)
}

/// T^{1-l'/n} sup_γ (1-e^{-γ}) / γ^{1-l'/n}.
pub fn duhamel_growth_constant(t_max: f64, lp: u32, n: u32) -> f64 {
    let e = 1.0 - lp as f64 / n as f64;
    let sup = (0..=400)
        .map(|i| 1e-6 * 1e12f64.powf(i as f64 / 400.0))
        .map(|g: f64| -(-g).exp_m1() / g.powf(e))
        .fold(0.0, f64::max);
    t_max.powf(e) * sup
}

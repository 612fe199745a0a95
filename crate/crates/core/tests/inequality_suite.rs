use std::f64::consts::PI;

use borelsum_core::inequalities::*;
use borelsum_core::problem::{check_cone_condition, SymbolPolynomial};
use borelsum_core::Complex64;

#[test]
fn incomplete_gamma_bound_on_grid() {
    for alpha in [1.01, 1.5, 2.0, 3.0, 4.5, 6.0, 8.0, 10.0] {
        for mu in [0.1, 1.0, 10.0, 100.0] {
            let (l, r) = incomplete_gamma_bound(alpha, mu);
            assert!(l <= r, "α={alpha} μ={mu}: {l} > {r}");
        }
    }
}

#[test]
fn damped_moment_bound_on_grid() {
    for alpha in [0.5, 1.0, 2.0, 5.0] {
        for mu in [0.1, 1.0, 10.0] {
            for nu in [3.0, 5.0, 10.0] {
                for m in 1..=3 {
                    for sigma in 0..=1 {
                        let (l, r) = damped_moment_bound(alpha, mu, nu, m, sigma);
                        assert!(l.is_finite() && l <= r, "α={alpha} μ={mu} ν={nu} m={m} σ={sigma}: {l} > {r}");
                    }
                }
            }
        }
    }
}

#[test]
fn exp_convolution_bound_with_fitted_constant() {
    for n in [2u32, 3, 4] {
        for nu in [2.0, 5.0] {
            // C is fitted on [1e-3, 4] (sampled sup plus 0.1%) and checked on a finer, wider range.
            let c = 1.001 * exp_convolution_constant(n, nu, 4.0);
            assert!(c.is_finite());
            for i in 0..=400 {
                let p = 1e-4 * (10.0 / 1e-4f64).powf(i as f64 / 400.0);
                let r = exp_convolution_ratio(p, n, nu);
                assert!(r <= c, "n={n} ν={nu} p={p}: {r} > {c}");
            }
        }
    }
}

#[test]
fn cone_scale_consistency() {
    let symbols = [
        SymbolPolynomial::minus_d_pow(3),
        SymbolPolynomial::scalar_1d(&[(3, Complex64::new(-1.0, 0.0)), (1, Complex64::new(2.0, 0.0)), (0, Complex64::new(-1.0, 0.0))]),
        SymbolPolynomial::scalar_1d(&[(2, Complex64::new(1.0, 0.0)), (1, Complex64::new(0.0, 3.0))]),
    ];
    for s in &symbols {
        let phi = PI / (4.0 * s.n as f64);
        let base = check_cone_condition(s, phi, 512).unwrap();
        for lambda in [0.5, 2.0, 7.0] {
            let r = check_cone_condition(&s.scaled(lambda), phi, 512).unwrap();
            assert_eq!(r.ok, base.ok);
            assert_eq!(r.r, base.r);
            assert!((r.c - lambda * base.c).abs() < 1e-12 * r.c.abs().max(1.0));
        }
    }
}

#[test]
fn cone_constant_for_pure_power() {
    for n in [2u32, 3, 4] {
        for frac in [0.25, 0.5, 0.9] {
            let phi = frac * PI / (2.0 * n as f64);
            // P(∂) = (-∂)ⁿ, so P(-p) = pⁿ.
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let s = SymbolPolynomial::scalar_1d(&[(n, Complex64::new(sign, 0.0))]);
            let r = check_cone_condition(&s, phi, 512).unwrap();
            assert!(r.ok && r.c >= (n as f64 * phi).cos() - 1e-9, "n={n} φ={phi}: {}", r.c);
        }
    }
}

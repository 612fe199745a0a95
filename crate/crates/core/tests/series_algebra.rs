use std::collections::BTreeMap;
use std::f64::consts::PI;

use borelsum_core::quad::gauss_jacobi_unit;
use borelsum_core::series::*;
use borelsum_core::{Complex64, Rational64};
use proptest::prelude::*;

type S = RamifiedSeries<Complex64>;

fn coeffs(s: &S) -> BTreeMap<Rational64, Vec<Complex64>> {
    s.terms().iter().map(|m| (m.exponent, m.coeff.c.clone())).collect()
}

fn assert_close(a: &S, b: &S, tol: f64) {
    let (ca, cb) = (coeffs(a), coeffs(b));
    let keys: std::collections::BTreeSet<_> = ca.keys().chain(cb.keys()).collect();
    for k in keys {
        let empty = Vec::new();
        let (x, y) = (ca.get(k).unwrap_or(&empty), cb.get(k).unwrap_or(&empty));
        for i in 0..x.len().max(y.len()) {
            let u = x.get(i).copied().unwrap_or_default();
            let v = y.get(i).copied().unwrap_or_default();
            assert!((u - v).norm() <= tol * (1.0 + u.norm().max(v.norm())), "exponent {k}, t^{i}: {u} vs {v}");
        }
    }
}

/// Five-term p-side series with exponents j/N > -1.
fn p_series(n: i64) -> impl Strategy<Value = S> {
    prop::collection::vec((-(n - 1)..4 * n, -2.0..2.0f64, -2.0..2.0f64), 5).prop_map(move |v| {
        let terms = v.into_iter().map(|(j, re, im)| RamifiedMonomial::constant(Rational64::new(j, n), Complex64::new(re, im))).collect();
        RamifiedSeries::with_ramification(VarTag::P, terms, n as u32).unwrap()
    })
}

/// Five-term x-side series with exponents -j/N < 0 and t-degree ≤ 2.
fn x_series(n: i64) -> impl Strategy<Value = S> {
    prop::collection::vec((1..4 * n, 0usize..3, -2.0..2.0f64), 5).prop_map(move |v| {
        let terms = v.into_iter().map(|(j, k, c)| RamifiedMonomial::new(Rational64::new(-j, n), TPoly::monomial(Complex64::new(c, 0.0), k))).collect();
        RamifiedSeries::with_ramification(VarTag::X, terms, n as u32).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn convolution_commutes(a in p_series(2), b in p_series(3)) {
        assert_close(&convolve_series(&a, &b).unwrap(), &convolve_series(&b, &a).unwrap(), 1e-13);
    }

    #[test]
    fn convolution_associates(a in p_series(2), b in p_series(2), c in p_series(3)) {
        let l = convolve_series(&convolve_series(&a, &b).unwrap(), &c).unwrap();
        let r = convolve_series(&a, &convolve_series(&b, &c).unwrap()).unwrap();
        assert_close(&l, &r, 1e-12);
    }

    #[test]
    fn convolution_bilinear(a in p_series(2), b in p_series(2), c in p_series(2), re in -3.0..3.0f64, im in -3.0..3.0f64) {
        let s = Complex64::new(re, im);
        let l = convolve_series(&a.scale(&s).try_add(&b).unwrap(), &c).unwrap();
        let r = convolve_series(&a, &c).unwrap().scale(&s).try_add(&convolve_series(&b, &c).unwrap()).unwrap();
        assert_close(&l, &r, 1e-12);
    }

    /// The Borel transform turns products into convolutions.
    #[test]
    fn borel_of_product(a in x_series(2), b in x_series(3)) {
        let prod = a.try_mul(&b).unwrap().borel().unwrap();
        let conv = convolve_series(&a.borel().unwrap(), &b.borel().unwrap()).unwrap();
        assert_close(&prod, &conv, 1e-12);
    }

    #[test]
    fn product_and_derivative(a in x_series(2), b in x_series(2)) {
        // Leibniz rule on exact exponent lattices.
        let l = a.try_mul(&b).unwrap().deriv();
        let r = a.deriv().try_mul(&b).unwrap().try_add(&a.try_mul(&b.deriv()).unwrap()).unwrap();
        assert_close(&l, &r, 1e-12);
    }

    #[test]
    fn text_roundtrip(a in p_series(3)) {
        let lines = a.to_lines();
        let back = RamifiedSeries::from_lines(VarTag::P, lines.iter().map(|s| s.as_str())).unwrap();
        assert_close(&back, &a, 0.0);
    }
}

/// ∫₀¹ u^a (1-u)^b du split at 1/2 so each half has one singular endpoint.
fn beta_quadrature(a: f64, b: f64) -> f64 {
    let half = |x: f64, y: f64| {
        let r = gauss_jacobi_unit(40, x);
        r.nodes.iter().zip(&r.weights).map(|(v, w)| w * 0.5f64.powf(x + 1.0) * (1.0 - 0.5 * v).powf(y)).sum::<f64>()
    };
    half(a, b) + half(b, a)
}

#[test]
fn gamma_identity_against_quadrature() {
    for &(a, b) in &[(-0.5, -0.5), (0.5, 0.5), (-2.0 / 3.0, 1.0 / 3.0), (0.0, 2.5), (1.5, 3.0), (-0.75, 4.25)] {
        let exact = convolution_constant(a, b);
        let quad = beta_quadrature(a, b);
        assert!((exact - quad).abs() < 1e-12 * exact.max(1.0), "({a},{b}): {exact} vs {quad}");
    }
    // p^{-1/2} * p^{-1/2} = π.
    assert!((convolution_constant(-0.5, -0.5) - PI).abs() < 1e-13);
}

fn analytic(j: usize) -> impl Fn(Complex64) -> Complex64 {
    move |p| (p * (0.3 * j as f64 + 0.1)).exp() / (p * p + 4.0) + Complex64::new(j as f64, -0.5)
}

#[test]
fn decomposition_roundtrip_one_dim() {
    for n in [2u32, 3, 4] {
        let pts: Vec<Vec<(f64, f64)>> = (0..12).map(|i| vec![(0.2 + 0.3 * i as f64, -0.4 + 0.07 * i as f64)]).collect();
        let g = |pt: &[(f64, f64)]| {
            let (r, arg) = pt[0];
            let p = Complex64::from_polar(r, arg);
            (0..n as usize).map(|j| Complex64::from_polar(r.powf(j as f64 / n as f64), arg * j as f64 / n as f64) * analytic(j)(p)).sum()
        };
        let samples = SheetSamples::from_fn(vec![n], pts.clone(), g);
        let dec = decompose_ramified(&samples).unwrap();
        let back = reconstruct(&pts, &[n], &dec);
        for (i, v) in back.iter().enumerate() {
            assert!((v - samples.values[&vec![0]][i]).norm() < 1e-10, "N={n}");
        }
        for j in 0..n as usize {
            for (i, pt) in pts.iter().enumerate() {
                let want = analytic(j)(Complex64::from_polar(pt[0].0, pt[0].1));
                assert!((dec.components[&vec![j as u32]][i] - want).norm() < 1e-10, "N={n} j={j}");
            }
        }
    }
}

#[test]
fn decomposition_roundtrip_two_dims() {
    let n = [2u32, 3];
    let pts: Vec<Vec<(f64, f64)>> = (0..8).map(|i| vec![(0.5 + 0.2 * i as f64, 0.1), (1.5 - 0.1 * i as f64, -0.2)]).collect();
    let g = |pt: &[(f64, f64)]| {
        let mut acc = Complex64::new(0.0, 0.0);
        for j0 in 0..2 {
            for j1 in 0..3 {
                let f0 = Complex64::from_polar(pt[0].0.powf(j0 as f64 / 2.0), pt[0].1 * j0 as f64 / 2.0);
                let f1 = Complex64::from_polar(pt[1].0.powf(j1 as f64 / 3.0), pt[1].1 * j1 as f64 / 3.0);
                let p0 = Complex64::from_polar(pt[0].0, pt[0].1);
                let p1 = Complex64::from_polar(pt[1].0, pt[1].1);
                acc += f0 * f1 * analytic(j0 + 2 * j1)(p0 + p1);
            }
        }
        acc
    };
    let samples = SheetSamples::from_fn(n.to_vec(), pts.clone(), g);
    let dec = decompose_ramified(&samples).unwrap();
    let back = reconstruct(&pts, &n, &dec);
    for (i, v) in back.iter().enumerate() {
        assert!((v - samples.values[&vec![0, 0]][i]).norm() < 1e-10);
    }
}

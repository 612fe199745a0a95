use borelsum_core::cheb::ChebNodes;
use borelsum_core::grid::*;
use borelsum_core::special::gamma;
use borelsum_core::transforms::{inverse_laplace_contour, ContourSpec};
use borelsum_core::{Complex64, Rational64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Positive function Σ c_i p^{k_i} e^{b_i p} (1 + ½ sin ω_i p), optionally times p^{-1/2}.
#[derive(Debug, Clone)]
struct Positive {
    parts: Vec<(f64, i32, f64, f64)>,
    half: bool,
}

impl Positive {
    fn eval(&self, p: f64) -> f64 {
        let v: f64 = self.parts.iter().map(|&(c, k, b, w)| c * p.powi(k) * (b * p).exp() * (1.0 + 0.5 * (w * p).sin())).sum();
        if self.half {
            v * p.powf(-0.5)
        } else {
            v
        }
    }

    fn random(rng: &mut impl Rng) -> Self {
        let parts = (0..3).map(|_| (rng.gen_range(0.1..2.0), rng.gen_range(0..4), rng.gen_range(-1.0..1.5), rng.gen_range(0.0..6.0))).collect();
        Self { parts, half: rng.gen_bool(0.5) }
    }

    fn grid(&self, m: usize) -> RayGridFunction {
        let a = if self.half { Rational64::new(-1, 2) } else { Rational64::from_integer(0) };
        let g = RayGrid::standard(0.0, m, 8.0, a, 2).unwrap();
        RayGridFunction::from_fn(g, ChebNodes::new(0, 1.0), |p, _| Complex64::new(self.eval(p.re), 0.0))
    }
}

fn positive() -> impl Strategy<Value = Positive> {
    (any::<u64>()).prop_map(|seed| Positive::random(&mut ChaCha8Rng::seed_from_u64(seed)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn nu_norm_nonincreasing(f in positive(), nu1 in 0.5..20.0f64, dnu in 0.0..10.0f64) {
        let g = f.grid(256);
        let a = nu_norm(&g, &NuNormParams::polynomial(nu1)).unwrap().value;
        let b = nu_norm(&g, &NuNormParams::polynomial(nu1 + dnu)).unwrap().value;
        prop_assert!(b <= a * (1.0 + 1e-15), "{b} > {a}");
    }
}

#[test]
fn submultiplicative_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let (f, g) = (Positive::random(&mut rng), Positive::random(&mut rng));
        let (fg, gg) = (f.grid(256), g.grid(256));
        let conv = convolve_grid(&fg, &gg).unwrap();
        let nu = [5.0, 8.0, 12.0][i % 3];
        let p = NuNormParams::polynomial(nu);
        let lhs = nu_norm(&conv, &p).unwrap().value;
        let rhs = nu_norm(&fg, &p).unwrap().value * nu_norm(&gg, &p).unwrap().value;
        worst = worst.max(lhs / rhs);
        assert!(lhs <= rhs * (1.0 + 1e-4), "pair {i} (ν = {nu}): {lhs} > {rhs}");
    }
    assert!(worst > 0.0);
}

#[test]
fn inverse_laplace_growth_bound() {
    // G = L⁻¹[x^{-α}] = p^{α-1}/Γ(α): |G| ≤ C|p|^{α-1}e^{2ρ|p|}/Γ(α) with ρ = 0, C = 1.
    let spec = ContourSpec::default();
    for alpha in [1.0, 2.0, 5.0] {
        for (r, th) in [(0.5, 0.0), (1.0, 0.2), (2.0, -0.2), (4.0, 0.1)] {
            let p = Complex64::from_polar(r, th);
            let v = inverse_laplace_contour(|x| x.powf(-alpha), p, &spec).unwrap();
            let bound = r.powf(alpha - 1.0) / gamma(alpha);
            assert!(v.value.norm() <= bound * (1.0 + 1e-8), "α={alpha} p={p}: {} > {bound}", v.value.norm());
            assert!((v.value - p.powf(alpha - 1.0) / gamma(alpha)).norm() < 1e-8 * bound.max(1.0));
        }
    }
}

#[test]
fn grid_convolution_of_half_powers() {
    let g = RayGrid::standard(0.0, 2048, 8.0, Rational64::new(1, 2), 2).unwrap();
    let f = RayGridFunction::from_fn(g, ChebNodes::new(0, 1.0), |p, _| p.sqrt());
    let c = convolve_grid(&f, &f).unwrap();
    let v = c.eval(1.0, 0).re;
    let want = std::f64::consts::PI / 8.0;
    assert!(((v - want) / want).abs() < 1e-6, "{v}");
}

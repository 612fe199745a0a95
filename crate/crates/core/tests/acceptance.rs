//! One PASS/FAIL line per acceptance criterion (custom harness, so the report is never captured).
//!
//! A criterion is a list of named sub-checks. Sub-checks listed in `KNOWN_RED` are
//! expected to fail and are reported but not asserted; every other sub-check must pass.

use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use borelsum_core::cheb::ChebNodes;
use borelsum_core::grid::{convolve_grid, m0_constant, nu_norm, NuNormParams, RayGrid, RayGridFunction};
use borelsum_core::harry_dym::{harry_dym_h, harry_dym_residual, observed_lattice, structure_check};
use borelsum_core::inequalities::{incomplete_gamma_bound, damped_moment_bound, exp_convolution_constant, exp_convolution_ratio};
use borelsum_core::oracle::{oracle_integrate, OracleConfig};
use borelsum_core::problem::PDEProblem;
use borelsum_core::quad::{gauss_jacobi_unit, gl_fixed};
use borelsum_core::series::{convolution_constant, decompose_ramified, rat_to_f64, reconstruct, SheetSamples};
use borelsum_core::solver::{small_p_exponent, solve, SolveConfig};
use borelsum_core::specfile::parse_problem;
use borelsum_core::transforms::{accelerate, acceleration_kernel_contour, kernel_n2, laplace_ray_at, AccelerationSpec, GrowthCertificate};
use borelsum_core::{Complex64, Rational64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// (criterion, sub-check) pairs that fail for a documented reason.
///
/// 8/lattice-(7k+1)/9: the initial term H₀ = z^{-1/2} = t^{-1/9}ζ^{-1/2} already sits at t^{-1/9},
/// so the exponents of H = Σ t^c G(ζ) are (7k-1)/9, not (7k+1)/9. Spacing 7/9 and the scaling
/// variable ζ = z t^{-2/9} are confirmed separately. See the decisions ledger.
const KNOWN_RED: &[(usize, &str)] = &[(8, "lattice-(7k+1)/9")];

struct Check {
    name: &'static str,
    ok: bool,
    detail: String,
}

fn check(name: &'static str, ok: bool, detail: impl Into<String>) -> Check {
    Check { name, ok, detail: detail.into() }
}

fn load(name: &str) -> (PDEProblem, SolveConfig) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../problems").join(name);
    let spec = parse_problem(&path).unwrap();
    let cfg = spec.solve_config().unwrap();
    (spec.problem, cfg)
}

fn c1() -> Vec<Check> {
    let m0 = m0_constant();
    vec![check("m0-range", (3.75..=3.77).contains(&m0), format!("M0 = {m0:.6}"))]
}

fn beta_quadrature(a: f64, b: f64) -> f64 {
    let half = |x: f64, y: f64| {
        let r = gauss_jacobi_unit(40, x);
        r.nodes.iter().zip(&r.weights).map(|(v, w)| w * 0.5f64.powf(x + 1.0) * (1.0 - 0.5 * v).powf(y)).sum::<f64>()
    };
    half(a, b) + half(b, a)
}

fn c2() -> Vec<Check> {
    let pairs = [(-0.5, -0.5), (0.5, 0.5), (-2.0 / 3.0, 1.0 / 3.0), (0.0, 2.5), (1.5, 3.0), (-0.75, 4.25)];
    let worst = pairs
        .iter()
        .map(|&(a, b)| {
            let e = convolution_constant(a, b);
            (e - beta_quadrature(a, b)).abs() / e.max(1.0)
        })
        .fold(0.0f64, f64::max);
    let g = RayGrid::standard(0.0, 2048, 8.0, Rational64::new(1, 2), 2).unwrap();
    let f = RayGridFunction::from_fn(g, ChebNodes::new(0, 1.0), |p, _| p.sqrt());
    let v = convolve_grid(&f, &f).unwrap().eval(1.0, 0).re;
    let rel = (v / (PI / 8.0) - 1.0).abs();
    vec![
        check("gamma-identity", worst < 1e-12, format!("worst rel {worst:.1e}")),
        check("half-powers-2048", rel < 1e-6, format!("rel {rel:.1e}")),
    ]
}

fn linear_exact(x: f64, t: f64) -> f64 {
    let mut total = 0.0;
    let mut a = 0.0;
    for b in [0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
        total += gl_fixed(|p| -(-p * p * p * t).exp_m1() / (p * p) * (-p * x).exp(), a, b, 60);
        a = b;
    }
    total
}

fn c3() -> Vec<Check> {
    let (p, cfg) = load("linear.spec");
    let (f, _) = solve(&p, &cfg).unwrap();
    let f = &f[0];
    let mut grid_err = 0.0f64;
    for (k, &t) in f.times.t.iter().enumerate() {
        for i in 0..f.grid.len() {
            let s = f.grid.nodes[i];
            grid_err = grid_err.max((f.at(i, k).re + (-s * s * s * t).exp_m1() / (s * s)).abs());
        }
    }
    let o = oracle_integrate(&p, &OracleConfig::default(), &linear_exact).unwrap();
    let mut oracle_err = 0.0f64;
    for (t, snap) in &o.snapshots {
        for (x, v) in o.x.iter().zip(snap).filter(|(x, _)| (5.0..=20.0).contains(*x)) {
            let b = laplace_ray_at(f, *t, Complex64::new(*x, 0.0)).unwrap().value.re;
            oracle_err = oracle_err.max((b - v).abs());
        }
    }
    vec![
        check("borel-plane-closed-form", grid_err < 1e-8, format!("max abs {grid_err:.1e}")),
        check("oracle", oracle_err < 1e-5, format!("max abs {oracle_err:.1e} on x in [5,20]")),
    ]
}

fn c4() -> Vec<Check> {
    let (p, cfg) = load("weakly-nonlinear.spec");
    let (_, rep) = solve(&p, &cfg).unwrap();
    let worst = rep.contraction_ratios.iter().cloned().fold(0.0f64, f64::max);
    vec![
        check("auto-nu", cfg.nu.is_none(), format!("nu = {}", rep.nu)),
        check("ratios", rep.converged && !rep.contraction_ratios.is_empty() && worst < 0.5, format!("max ratio {worst:.2e}")),
        check("residual", rep.residual < 1e-8, format!("{:.1e}", rep.residual)),
    ]
}

fn positive(rng: &mut ChaCha8Rng) -> RayGridFunction {
    let parts: Vec<(f64, i32, f64, f64)> =
        (0..3).map(|_| (rng.gen_range(0.1..2.0), rng.gen_range(0..4), rng.gen_range(-1.0..1.5), rng.gen_range(0.0..6.0))).collect();
    let half = rng.gen_bool(0.5);
    let a = if half { Rational64::new(-1, 2) } else { Rational64::from_integer(0) };
    let g = RayGrid::standard(0.0, 256, 8.0, a, 2).unwrap();
    RayGridFunction::from_fn(g, ChebNodes::new(0, 1.0), move |p, _| {
        let s = p.re;
        let v: f64 = parts.iter().map(|&(c, k, b, w)| c * s.powi(k) * (b * s).exp() * (1.0 + 0.5 * (w * s).sin())).sum();
        Complex64::new(if half { v / s.sqrt() } else { v }, 0.0)
    })
}

fn c5() -> Vec<Check> {
    let mut bad = Vec::new();
    for alpha in [1.01, 1.5, 2.0, 3.0, 4.5, 6.0, 8.0, 10.0] {
        for mu in [0.1, 1.0, 10.0, 100.0] {
            let (l, r) = incomplete_gamma_bound(alpha, mu);
            if l > r {
                bad.push(format!("incomplete_gamma_bound({alpha},{mu})"));
            }
        }
    }
    for alpha in [0.5, 1.0, 2.0, 5.0] {
        for mu in [0.1, 1.0, 10.0] {
            for nu in [3.0, 5.0, 10.0] {
                for m in 1..=3 {
                    for sigma in 0..=1 {
                        let (l, r) = damped_moment_bound(alpha, mu, nu, m, sigma);
                        if !(l.is_finite() && l <= r) {
                            bad.push(format!("damped_moment_bound({alpha},{mu},{nu},{m},{sigma})"));
                        }
                    }
                }
            }
        }
    }
    for n in [2u32, 3, 4] {
        for nu in [2.0, 5.0] {
            let c = 1.001 * exp_convolution_constant(n, nu, 4.0);
            for i in 0..=400 {
                let p = 1e-4 * (1e5f64).powf(i as f64 / 400.0);
                if exp_convolution_ratio(p, n, nu) > c {
                    bad.push(format!("pd({n},{nu},{p:.2e})"));
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let (f, g) = (positive(&mut rng), positive(&mut rng));
        let params = NuNormParams::polynomial([5.0, 8.0, 12.0][i % 3]);
        let lhs = nu_norm(&convolve_grid(&f, &g).unwrap(), &params).unwrap().value;
        let rhs = nu_norm(&f, &params).unwrap().value * nu_norm(&g, &params).unwrap().value;
        worst = worst.max(lhs / rhs);
    }
    vec![
        check("inequalities", bad.is_empty(), if bad.is_empty() { "all sample points hold".to_string() } else { bad.join(" ") }),
        check("submultiplicative", worst <= 1.0 + 1e-4, format!("max |f*g|/(|f||g|) = {worst:.4}")),
    ]
}

fn c6() -> Vec<Check> {
    let analytic = |j: usize, p: Complex64| (p * (0.3 * j as f64 + 0.1)).exp() / (p * p + 4.0) + Complex64::new(j as f64, -0.5);
    let mut worst = 0.0f64;
    for n in [2u32, 3, 4] {
        let pts: Vec<Vec<(f64, f64)>> = (0..12).map(|i| vec![(0.2 + 0.3 * i as f64, -0.4 + 0.07 * i as f64)]).collect();
        let g = |pt: &[(f64, f64)]| {
            let (r, arg) = pt[0];
            (0..n as usize)
                .map(|j| Complex64::from_polar(r.powf(j as f64 / n as f64), arg * j as f64 / n as f64) * analytic(j, Complex64::from_polar(r, arg)))
                .sum()
        };
        let samples = SheetSamples::from_fn(vec![n], pts.clone(), g);
        let dec = decompose_ramified(&samples).unwrap();
        for (v, w) in reconstruct(&pts, &[n], &dec).iter().zip(&samples.values[&vec![0]]) {
            worst = worst.max((v - w).norm());
        }
        for j in 0..n as usize {
            for (i, pt) in pts.iter().enumerate() {
                worst = worst.max((dec.components[&vec![j as u32]][i] - analytic(j, Complex64::from_polar(pt[0].0, pt[0].1))).norm());
            }
        }
    }
    vec![check("roundtrip-N234", worst < 1e-10, format!("max err {worst:.1e}"))]
}

fn c7() -> Vec<Check> {
    let spec = AccelerationSpec::new(2);
    let cert = GrowthCertificate { n: 2, nu: 1e-3, bound: 1.0 };
    let g = |q: f64| Complex64::new((-q).exp(), 0.0);
    let r = accelerate(&g, Some(cert), &[1.0], &[1.0, 2.0, 4.0], &spec).unwrap();
    let ident = r.identity_check.iter().map(|(_, a, b)| (a - b).norm()).fold(0.0f64, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut kernel = 0.0f64;
    for _ in 0..10 {
        let (p, q): (f64, f64) = (rng.gen_range(0.1..5.0), rng.gen_range(0.05..6.0));
        let k = kernel_n2(p, q);
        kernel = kernel.max((acceleration_kernel_contour(p, q, &spec).unwrap() - k).abs() / k.max(1.0));
    }
    vec![
        check("identity-n2", r.identity_check.len() == 3 && ident < 1e-5, format!("max diff {ident:.1e}")),
        check("kernel-closed-form", kernel < 1e-8, format!("max diff {kernel:.1e} over 10 pairs")),
    ]
}

fn c8() -> Vec<Check> {
    let h = harry_dym_h(6).unwrap();
    let h1: Vec<(String, String)> = h[1].terms().iter().map(|m| (m.exponent.to_string(), m.coeff.coeff(0).to_string())).collect();
    let h1_ok = h1 == [("-5".to_string(), "-15/8".to_string()), ("-3/2".to_string(), "-1/2".to_string())];
    let structure = h.iter().enumerate().all(|(n, s)| structure_check(s, n).is_ok());
    let degrees: Vec<usize> = (1..=3).map(|n| harry_dym_residual(n).unwrap().lowest_degree).collect();
    let lat = observed_lattice(&h);
    let exps: Vec<Rational64> = lat.exponents.iter().map(|e| e.parse().unwrap()).collect();
    let strict = exps.iter().all(|c| {
        let k = (*c * 9 - 1) / 7;
        k.is_integer() && k >= Rational64::from_integer(0)
    });
    vec![
        check("H1-exact", h1_ok, format!("{h1:?}")),
        check("structure-n<=6", structure, "H_n in z^{-1/2} poly(z^{-9/2}, z^{-1})"),
        check("residual-degree", degrees == [2, 3, 4], format!("lowest degrees {degrees:?} for N = 1..3")),
        check("lattice-7/9-offset-1/9", lat.on_lattice && lat.spacing == "7/9" && lat.offset == "-1/9", format!("zeta = z t^(-2/9), offset {}", lat.offset)),
        check("lattice-(7k+1)/9", strict, format!("observed exponents {}", lat.exponents[..4].join(", "))),
    ]
}

fn c9() -> Vec<Check> {
    let mut out = Vec::new();
    let names: [(&'static str, &str); 5] = [
        ("linear", "linear.spec"),
        ("weakly-nonlinear", "weakly-nonlinear.spec"),
        ("derivative-budget", "derivative-budget.spec"),
        ("kdv-raw", "kdv-raw.spec"),
        ("harry-dym", "harry-dym.spec"),
    ];
    for (label, file) in names {
        let (p, cfg) = load(file);
        let (f, _) = solve(&p, &cfg).unwrap();
        let mut detail = Vec::new();
        let mut ok = true;
        for (l, fl) in f.iter().enumerate() {
            let fit = small_p_exponent(fl).unwrap();
            // α_r per component: the forcing's slowest decay.
            let want = -rat_to_f64(p.forcing[l].max_exponent().unwrap()) - 1.0;
            ok &= !fit.inconclusive && (fit.exponent - want).abs() < 0.05;
            detail.push(format!("{:.4} vs {want}", fit.exponent));
        }
        out.push(check(label, ok, detail.join("; ")));
    }
    out
}

fn main() {
    let criteria: [(usize, fn() -> Vec<Check>); 9] = [(1, c1), (2, c2), (3, c3), (4, c4), (5, c5), (6, c6), (7, c7), (8, c8), (9, c9)];
    let mut unexpected = Vec::new();
    for (id, run) in criteria {
        let start = Instant::now();
        let checks = run();
        let secs = start.elapsed().as_secs_f64();
        let pass = checks.iter().all(|c| c.ok);
        println!("criterion {id}: {} ({secs:.1} s)", if pass { "PASS" } else { "FAIL" });
        for c in &checks {
            let known = KNOWN_RED.contains(&(id, c.name));
            let tag = match (c.ok, known) {
                (true, _) => "ok",
                (false, true) => "known red",
                (false, false) => "FAILED",
            };
            println!("    {:<26} {tag:<9} {}", c.name, c.detail);
            if !c.ok && !known {
                unexpected.push(format!("{id}/{}", c.name));
            }
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: all criteria pass except the known-red sub-checks {KNOWN_RED:?}");
    } else {
        eprintln!("acceptance: unexpected failures {unexpected:?}");
        std::process::exit(1);
    }
}

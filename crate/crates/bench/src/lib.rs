//! Fixtures shared by the criterion benches.

use borelsum_core::cheb::ChebNodes;
use borelsum_core::grid::{RayGrid, RayGridFunction};
use borelsum_core::problem::{DerivFactor, MultiIndex, NonlinearTerm, PDEProblem, SymbolPolynomial};
use borelsum_core::series::{RamifiedSeries, VarTag};
use borelsum_core::solver::SolveConfig;
use borelsum_core::{Complex64, Rational64};

/// p^{-1/2} e^{-p} (1 + p²) on an m-node ray, one time slice.
pub fn sample_function(m: usize) -> RayGridFunction {
    let g = RayGrid::standard(0.0, m, 8.0, Rational64::new(-1, 2), 2).unwrap();
    RayGridFunction::from_fn(g, ChebNodes::new(0, 1.0), |p, _| p.powf(-0.5) * (-p).exp() * (1.0 + p * p))
}

/// f_t - f_xxx = x^{-2} + 0.01 x^{-1} f f_x.
pub fn weakly_nonlinear() -> PDEProblem {
    let x = |e: i64, c: f64| RamifiedSeries::monomial(VarTag::X, Rational64::from_integer(e), Complex64::new(c, 0.0)).unwrap();
    let mut p = PDEProblem::linear_1d(SymbolPolynomial::minus_d_pow(3), x(-2, 1.0), RamifiedSeries::zero(VarTag::X));
    p.terms.push(NonlinearTerm {
        equation: 0,
        k: MultiIndex(vec![1]),
        q: vec![DerivFactor { component: 0, j: MultiIndex(vec![1]), power: 1 }],
        coeff: x(-1, 0.01),
    });
    p
}

pub fn bench_config(nodes: usize) -> SolveConfig {
    SolveConfig { nodes, time_nodes: 8, ..SolveConfig::default() }
}

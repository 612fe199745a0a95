use std::f64::consts::PI;

use borelsum_core::normalize::{normalize, xcoef, JetPoly, RawEquation};
use borelsum_core::problem::{validate_constraint, SectorSpec, SymbolPolynomial};
use borelsum_core::series::{brat, RamifiedSeries, VarTag};
use borelsum_core::Rational64;
use proptest::prelude::*;

/// Jet monomials u^{v0} (∂u)^{v1} ... below the top order, with x^{-e/2} t^k coefficients, e ≥ 2
/// so the data decay at least like 1/x.
fn jet(n: usize) -> impl Strategy<Value = JetPoly> {
    let mono = (prop::collection::vec(0u32..3, n), -3i64..=3, 2i64..=6, 0usize..2);
    prop::collection::vec(mono, 1..4).prop_map(move |ms| {
        let mut p = JetPoly::zero();
        for (key, c, e, k) in ms {
            if c == 0 {
                continue;
            }
            p.add_term(key, xcoef(brat(c, 1), Rational64::new(-e, 2), k).unwrap()).unwrap();
        }
        p
    })
}

fn raw() -> impl Strategy<Value = RawEquation> {
    (2u32..=4).prop_flat_map(|n| {
        (jet(n as usize), prop::option::of(jet(n as usize)), 1i64..=4).prop_map(move |(g1, g2, e0)| {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            RawEquation {
                n,
                symbol: SymbolPolynomial::scalar_1d(&[(n, borelsum_core::Complex64::new(sign, 0.0))]),
                g1,
                g2: g2.unwrap_or_else(JetPoly::zero),
                u_initial: xcoef(brat(1, 1), Rational64::from_integer(-e0), 0).unwrap(),
                sector: SectorSpec { phi: PI / (4.0 * n as f64), rho: 1.0, directions: vec![0.0], d: 1 },
                horizon: 1.0,
                epsilon: 1.0,
                name: format!("generated n={n}"),
            }
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn normalized_output_meets_derivative_budget(eq in raw()) {
        let p = normalize(&eq).unwrap();
        prop_assert_eq!(p.m, eq.n as usize);
        prop_assert!(validate_constraint(&p).is_empty(), "{:?}", validate_constraint(&p));
        prop_assert!(p.validate().is_empty(), "{:?}", p.validate());
        for t in &p.terms {
            prop_assert!(t.derivative_weight() <= p.n);
        }
    }
}

#[test]
fn top_order_in_g1_is_rejected() {
    let mut g1_sq = JetPoly::zero();
    g1_sq.add_term(vec![0, 0, 0, 2], xcoef(brat(1, 1), Rational64::from_integer(-1), 0).unwrap()).unwrap();
    let eq = RawEquation {
        n: 3,
        symbol: SymbolPolynomial::minus_d_pow(3),
        g1: g1_sq,
        g2: JetPoly::zero(),
        u_initial: RamifiedSeries::zero(VarTag::X),
        sector: SectorSpec { phi: PI / 12.0, rho: 1.0, directions: vec![0.0], d: 1 },
        horizon: 1.0,
        epsilon: 1.0,
        name: "bad".into(),
    };
    assert!(normalize(&eq).is_err());
}

//! Formal large-x series solutions by repeated leading-balance subtraction.

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::Zero;
use serde::Serialize;

use crate::error::Result;
use crate::problem::PDEProblem;
use crate::series::{RamifiedMonomial, RamifiedSeries, TPoly, VarTag};

type XS = RamifiedSeries<Complex64>;

#[derive(Debug, Clone, PartialEq)]
pub struct FormalTerm {
    pub component: usize,
    /// Power of x (negative).
    pub exponent: Rational64,
    /// Taylor coefficients in t.
    pub coeff: TPoly<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FormalSolution {
    /// Terms in order of discovery, one balance step may add several components.
    pub terms: Vec<FormalTerm>,
    /// Partial sums per component.
    pub partial: Vec<XS>,
    /// Number of balance steps achieved.
    pub depth: usize,
    pub complete: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FormalConfig {
    /// Taylor order in t.
    pub t_order: usize,
    /// Coefficients below this are treated as zero.
    pub zero_tol: f64,
}

impl Default for FormalConfig {
    fn default() -> Self {
        Self { t_order: 8, zero_tol: 1e-13 }
    }
}

fn truncate(s: &XS, t_order: usize, cutoff: Rational64, tol: f64) -> Result<XS> {
    let terms = s
        .terms()
        .iter()
        .filter(|m| m.exponent >= cutoff)
        .map(|m| {
            let c = m.coeff.truncate(t_order);
            let c = TPoly::from_coeffs(c.c.into_iter().map(|v| if v.norm() < tol { Complex64::zero() } else { v }).collect());
            RamifiedMonomial::new(m.exponent, c)
        })
        .filter(|m| !m.coeff.is_zero())
        .collect();
    RamifiedSeries::with_ramification(VarTag::X, terms, s.ramification())
}

/// r - ∂_t f - P(∂) f + Σ b f^k Π(∂^j f)^q, per component.
pub fn residual(problem: &PDEProblem, f: &[XS], cfg: &FormalConfig, cutoff: Rational64) -> Result<Vec<XS>> {
    let mut out = Vec::with_capacity(problem.m);
    for l in 0..problem.m {
        let mut r = problem.forcing.get(l).cloned().unwrap_or_else(|| XS::zero(VarTag::X));
        r = r.try_sub(&f[l].deriv_t())?;
        for (mi, c) in &problem.symbol.comps[l] {
            let mut d = f[l].clone();
            for _ in 0..mi.abs() {
                d = d.deriv();
            }
            r = r.try_sub(&d.scale(c))?;
        }
        for term in problem.terms.iter().filter(|t| t.equation == l) {
            let mut v = term.coeff.clone();
            for (i, &k) in term.k.0.iter().enumerate() {
                for _ in 0..k {
                    v = truncate(&v.try_mul(&f[i])?, cfg.t_order, cutoff, cfg.zero_tol)?;
                }
            }
            for q in &term.q {
                let mut d = f[q.component].clone();
                for _ in 0..q.j.abs() {
                    d = d.deriv();
                }
                for _ in 0..q.power {
                    v = truncate(&v.try_mul(&d)?, cfg.t_order, cutoff, cfg.zero_tol)?;
                }
            }
            r = r.try_add(&v)?;
        }
        // A' is only exact through degree t_order - 1.
        out.push(truncate(&r, cfg.t_order.saturating_sub(1), cutoff, cfg.zero_tol)?);
    }
    Ok(out)
}

fn coeff_at(s: &XS, e: Rational64) -> TPoly<Complex64> {
    s.terms().iter().find(|m| m.exponent == e).map(|m| m.coeff.clone()).unwrap_or_else(TPoly::zero)
}

/// K balance steps of the formal series solution.
pub fn formal_series_solve(problem: &PDEProblem, k_steps: usize, cfg: &FormalConfig) -> Result<FormalSolution> {
    let m = problem.m;
    let mut f: Vec<XS> = vec![XS::zero(VarTag::X); m];
    let mut terms = Vec::new();
    let alpha_r = problem.alpha_r().unwrap_or_else(|| Rational64::from_integer(1));
    let cutoff = -(alpha_r + Rational64::from_integer(4 * k_steps as i64 + 8));
    // Zeroth-order linear coupling M(t): -c₀ on the diagonal plus x⁰ parts of linear b's.
    let mut mat: Vec<Vec<TPoly<Complex64>>> = vec![vec![TPoly::zero(); m]; m];
    for l in 0..m {
        for (mi, c) in &problem.symbol.comps[l] {
            if mi.abs() == 0 {
                mat[l][l] = &mat[l][l] + &TPoly::constant(-*c);
            }
        }
    }
    for t in &problem.terms {
        if t.k.abs() == 1 && t.q.is_empty() {
            let i = t.k.0.iter().position(|&k| k == 1).expect("unit index");
            let b0 = coeff_at(&t.coeff, Rational64::zero());
            mat[t.equation][i] = &mat[t.equation][i] + &b0;
        }
    }
    let mut last: Option<Rational64> = None;
    let mut depth = 0;
    let mut note = None;
    for _ in 0..k_steps {
        let res = residual(problem, &f, cfg, cutoff)?;
        let init_gap: Vec<XS> = (0..m)
            .map(|l| {
                let fi = problem.initial.get(l).cloned().unwrap_or_else(|| XS::zero(VarTag::X));
                let at0 = RamifiedSeries::with_ramification(
                    VarTag::X,
                    f[l].terms().iter().map(|t| RamifiedMonomial::constant(t.exponent, t.coeff.coeff(0))).collect(),
                    f[l].ramification(),
                )?;
                truncate(&fi.try_sub(&at0)?, 0, cutoff, cfg.zero_tol)
            })
            .collect::<Result<_>>()?;
        let lead = res.iter().chain(&init_gap).filter_map(|s| s.max_exponent()).max();
        let Some(e) = lead else {
            note = Some("residual vanishes: the series terminates".into());
            depth += 1;
            return Ok(FormalSolution { terms, partial: f, depth, complete: true, note });
        };
        if let Some(prev) = last {
            if e >= prev {
                note = Some(format!("leading exponent did not decrease past x^{prev} (got x^{e})"));
                break;
            }
        }
        last = Some(e);
        // Taylor solve of A' = M A + R, A(0) = a₀.
        let rcoef: Vec<TPoly<Complex64>> = res.iter().map(|s| coeff_at(s, e)).collect();
        let mut a: Vec<Vec<Complex64>> = (0..m).map(|l| vec![coeff_at(&init_gap[l], e).coeff(0)]).collect();
        for j in 0..cfg.t_order {
            for l in 0..m {
                let mut acc = rcoef[l].coeff(j);
                for i in 0..m {
                    for s in 0..=j {
                        acc += mat[l][i].coeff(s) * a[i][j - s];
                    }
                }
                a[l].push(acc / (j as f64 + 1.0));
            }
        }
        for l in 0..m {
            let c = TPoly::from_coeffs(a[l].iter().map(|v| if v.norm() < cfg.zero_tol { Complex64::zero() } else { *v }).collect());
            if c.is_zero() {
                continue;
            }
            f[l] = f[l].try_add(&RamifiedSeries::with_ramification(
                VarTag::X,
                vec![RamifiedMonomial::new(e, c.clone())],
                f[l].ramification().max(problem.ramification.first().copied().unwrap_or(1)),
            )?)?;
            terms.push(FormalTerm { component: l, exponent: e, coeff: c });
        }
        depth += 1;
    }
    let complete = depth == k_steps;
    Ok(FormalSolution { terms, partial: f, depth, complete, note })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::SymbolPolynomial;

    fn xm(e: i64, c: f64) -> XS {
        RamifiedSeries::monomial(VarTag::X, Rational64::from_integer(e), Complex64::new(c, 0.0)).unwrap()
    }

    #[test]
    fn relaxation_leading_term() {
        // f_t + f = 1/x: A(t) = 1 - e^{-t}.
        let mut p = PDEProblem::linear_1d(SymbolPolynomial::minus_d_pow(3), xm(-1, 1.0), XS::zero(VarTag::X));
        p.symbol = SymbolPolynomial::scalar_1d(&[(0, Complex64::new(1.0, 0.0))]);
        let s = formal_series_solve(&p, 1, &FormalConfig::default()).unwrap();
        let a = &s.terms[0].coeff;
        let mut fact = 1.0;
        for k in 1..=8 {
            fact *= k as f64;
            let want = if k % 2 == 1 { 1.0 / fact } else { -1.0 / fact };
            assert!((a.coeff(k).re - want).abs() < 1e-14, "{k}");
        }
        assert_eq!(s.terms[0].exponent, Rational64::from_integer(-1));
    }

    #[test]
    fn airy_type_series() {
        let p = PDEProblem::linear_1d(SymbolPolynomial::minus_d_pow(3), xm(-2, 1.0), XS::zero(VarTag::X));
        let s = formal_series_solve(&p, 3, &FormalConfig::default()).unwrap();
        assert!(s.complete);
        // t x^{-2} - 12 t² x^{-5} + ...: third term from ∂³ x^{-5} = -210 x^{-8}.
        assert_eq!(s.terms[0].exponent, Rational64::from_integer(-2));
        assert!((s.terms[0].coeff.coeff(1).re - 1.0).abs() < 1e-14);
        assert_eq!(s.terms[1].exponent, Rational64::from_integer(-5));
        assert!((s.terms[1].coeff.coeff(2).re + 12.0).abs() < 1e-12);
        assert_eq!(s.terms[2].exponent, Rational64::from_integer(-8));
        assert!((s.terms[2].coeff.coeff(3).re - 840.0).abs() < 1e-9);
    }
}

//! Reduction of a quasilinear scalar equation
//! u_t + P(∂)u + g₂(x,t,jet)·∂ⁿu = g₁(x,t,jet), jet = (u, ∂u, ..., ∂^{n-1}u),
//! to the extended system for f = (u, ∂u, ..., ∂^{n-1}u) with exact arithmetic.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_rational::BigRational;

use crate::error::{BorelError, Result};
use crate::problem::{DerivFactor, MultiIndex, NonlinearTerm, PDEProblem, SectorSpec, SymbolPolynomial};
use crate::series::{big_to_f64, RamifiedSeries, TPoly, VarTag};

pub type XSeries = RamifiedSeries<BigRational>;

/// Polynomial in the jet variables v_k = ∂^k u with x-series coefficients.
/// Keys are exponent vectors (v_0, v_1, ...), trailing zeros trimmed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct JetPoly {
    pub terms: BTreeMap<Vec<u32>, XSeries>,
}

fn trim(mut k: Vec<u32>) -> Vec<u32> {
    while k.last() == Some(&0) {
        k.pop();
    }
    k
}

impl JetPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn add_term(&mut self, key: Vec<u32>, c: XSeries) -> Result<()> {
        let key = trim(key);
        let merged = match self.terms.remove(&key) {
            Some(old) => old.try_add(&c)?,
            None => c,
        };
        if !merged.is_zero() {
            self.terms.insert(key, merged);
        }
        Ok(())
    }

    pub fn monomial(key: Vec<u32>, c: XSeries) -> Result<Self> {
        let mut p = Self::zero();
        p.add_term(key, c)?;
        Ok(p)
    }

    /// Highest derivative order present, if any variable appears.
    pub fn max_order(&self) -> Option<usize> {
        self.terms.keys().filter(|k| !k.is_empty()).map(|k| k.len() - 1).max()
    }

    pub fn try_add(&self, o: &Self) -> Result<Self> {
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.add_term(k.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        Self { terms: self.terms.iter().map(|(k, c)| (k.clone(), c.neg())).collect() }
    }

    /// Multiplies by v_k.
    pub fn times_var(&self, k: usize) -> Result<Self> {
        let mut out = Self::zero();
        for (key, c) in &self.terms {
            let mut nk = key.clone();
            if nk.len() <= k {
                nk.resize(k + 1, 0);
            }
            nk[k] += 1;
            out.add_term(nk, c.clone())?;
        }
        Ok(out)
    }

    /// Total x-derivative: ∂c·Π + c·Σ e_k v_k^{e_k-1} v_{k+1} Π'.
    pub fn dx(&self) -> Result<Self> {
        let mut out = Self::zero();
        for (key, c) in &self.terms {
            let dc = c.deriv();
            if !dc.is_zero() {
                out.add_term(key.clone(), dc)?;
            }
            for (k, &e) in key.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let mut nk = key.clone();
                nk[k] -= 1;
                if nk.len() <= k + 1 {
                    nk.resize(k + 2, 0);
                }
                nk[k + 1] += 1;
                let f = BigRational::from_integer(num_bigint::BigInt::from(e));
                out.add_term(nk, c.scale(&f))?;
            }
        }
        Ok(out)
    }
}

/// Raw scalar quasilinear equation in one space dimension.
#[derive(Debug, Clone)]
pub struct RawEquation {
    pub n: u32,
    pub symbol: SymbolPolynomial,
    pub g1: JetPoly,
    /// Coefficient of ∂ⁿu.
    pub g2: JetPoly,
    pub u_initial: XSeries,
    pub sector: SectorSpec,
    pub horizon: f64,
    pub epsilon: f64,
    pub name: String,
}

fn to_c64_series(s: &XSeries) -> RamifiedSeries<Complex64> {
    s.convert(|c| Complex64::new(big_to_f64(c), 0.0))
}

/// Builds the extended system: equation l is ∂^l applied to the raw equation.
pub fn normalize(raw: &RawEquation) -> Result<PDEProblem> {
    let n = raw.n as usize;
    if n < 2 {
        return Err(BorelError::InvalidProblem("order n = 1 is excluded".into()));
    }
    if raw.symbol.d != 1 || raw.symbol.m() != 1 {
        return Err(BorelError::Unsupported("the normalizer handles scalar d = 1 equations".into()));
    }
    for (name, g) in [("g1", &raw.g1), ("g2", &raw.g2)] {
        if let Some(o) = g.max_order() {
            if o >= n {
                return Err(BorelError::NonQuasilinear(format!(
                    "{name} depends on ∂^{o}u; only derivatives of order < {n} may enter nonlinearly"
                )));
            }
        }
    }
    // Right-hand side G = g₁ - g₂·∂ⁿu.
    let mut g = raw.g1.try_add(&raw.g2.times_var(n)?.neg())?;
    let m = n;
    let mut terms = Vec::new();
    let mut forcing = Vec::new();
    let mut initial = Vec::new();
    let mut ui = raw.u_initial.clone();
    for l in 0..m {
        if l > 0 {
            g = g.dx()?;
            ui = ui.deriv();
        }
        initial.push(to_c64_series(&ui));
        let mut r = RamifiedSeries::zero(VarTag::X);
        for (key, c) in &g.terms {
            if key.is_empty() {
                r = to_c64_series(c);
                continue;
            }
            terms.push(jet_term(l, key, c, m)?);
        }
        forcing.push(r);
    }
    let comps = vec![raw.symbol.comps[0].clone(); m];
    let symbol = SymbolPolynomial { n: raw.n, d: 1, comps };
    let ram = forcing
        .iter()
        .chain(&initial)
        .map(|s| s.ramification())
        .chain(terms.iter().map(|t: &NonlinearTerm| t.coeff.ramification()))
        .max()
        .unwrap_or(1);
    Ok(PDEProblem {
        d: 1,
        n: raw.n,
        m,
        symbol,
        terms,
        forcing,
        initial,
        epsilon: raw.epsilon,
        sector: raw.sector.clone(),
        horizon: raw.horizon,
        ramification: vec![ram],
        setting: None,
        name: format!("{} (normalized)", raw.name),
    })
}

/// v_k with k < m is the component f_k; v_k with k ≥ m is ∂^{k-m+1} f_{m-1}.
fn jet_term(equation: usize, key: &[u32], c: &XSeries, m: usize) -> Result<NonlinearTerm> {
    let mut k = vec![0u32; m];
    let mut q = Vec::new();
    for (order, &e) in key.iter().enumerate() {
        if e == 0 {
            continue;
        }
        if order < m {
            k[order] += e;
        } else {
            q.push(DerivFactor { component: m - 1, j: MultiIndex(vec![(order - m + 1) as u32]), power: e });
        }
    }
    Ok(NonlinearTerm { equation, k: MultiIndex(k), q, coeff: to_c64_series(c) })
}

/// Constant coefficient c·x^e t^deg as an exact x-series.
pub fn xcoef(c: BigRational, e: num_rational::Rational64, tdeg: usize) -> Result<XSeries> {
    RamifiedSeries::from_terms(
        VarTag::X,
        vec![crate::series::RamifiedMonomial::new(e, TPoly::monomial(c, tdeg))],
    )
}

//! Problem description for systems f_t + P(∂)f = Σ' b_{q,k} f^k Π(∂^j f_l)^{q_{l,j}} + r,
//! structural checks, and the cone condition on the principal symbol.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{BorelError, Result};
use crate::series::{rat_to_f64, RamifiedSeries, VarTag};

/// Multi-index of nonnegative integers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }
    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = vec![0; len];
        v[i] = 1;
        Self(v)
    }
    pub fn abs(&self) -> u32 {
        self.0.iter().sum()
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

/// Sector |arg x_i| < π/2 + φ, |x_i| > ρ and its Borel dual |arg p_i| < φ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorSpec {
    pub phi: f64,
    pub rho: f64,
    pub directions: Vec<f64>,
    pub d: usize,
}

impl SectorSpec {
    pub fn validate(&self, n: u32) -> Vec<String> {
        let mut out = Vec::new();
        let cap = PI / (2.0 * n as f64);
        if !(self.phi > 0.0 && self.phi < cap) {
            out.push(format!("sector angle {} outside (0, π/(2n) = {cap})", self.phi));
        }
        if self.rho < 0.0 {
            out.push(format!("negative inner radius {}", self.rho));
        }
        for &th in &self.directions {
            if th.abs() >= self.phi {
                out.push(format!("ray angle {th} outside (-φ, φ)"));
            }
        }
        out
    }
}

/// Diagonal constant-coefficient operator: component l has P_l(∂) = Σ_j c_{l,j} ∂^j.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolPolynomial {
    pub n: u32,
    pub d: usize,
    pub comps: Vec<BTreeMap<MultiIndex, Complex64>>,
}

impl SymbolPolynomial {
    /// Scalar d = 1 symbol from coefficients c_j of ∂^j.
    pub fn scalar_1d(coeffs: &[(u32, Complex64)]) -> Self {
        let mut m = BTreeMap::new();
        for &(j, c) in coeffs {
            *m.entry(MultiIndex(vec![j])).or_insert(Complex64::zero()) += c;
        }
        let n = m.iter().filter(|(_, c)| c.norm() > 0.0).map(|(j, _)| j.abs()).max().unwrap_or(0);
        Self { n, d: 1, comps: vec![m] }
    }

    /// Symbol whose value at -p is p^n, i.e. P(∂) = (-∂)^n.
    pub fn minus_d_pow(n: u32) -> Self {
        let c = if n % 2 == 0 { 1.0 } else { -1.0 };
        Self::scalar_1d(&[(n, Complex64::new(c, 0.0))])
    }

    pub fn m(&self) -> usize {
        self.comps.len()
    }

    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (l, c) in self.comps.iter().enumerate() {
            if !c.iter().any(|(j, v)| j.abs() == self.n && v.norm() > 0.0) {
                out.push(format!("component {l}: no nonzero coefficient of order {}", self.n));
            }
            if c.keys().any(|j| j.abs() > self.n || j.len() != self.d) {
                out.push(format!("component {l}: index outside |j| ≤ {} or wrong length", self.n));
            }
        }
        out
    }

    fn eval_impl(&self, l: usize, p: &[Complex64], principal: bool) -> Complex64 {
        let mut acc = Complex64::zero();
        for (j, c) in &self.comps[l] {
            if principal && j.abs() != self.n {
                continue;
            }
            let mut term = *c;
            for (pi, &ji) in p.iter().zip(&j.0) {
                term *= (-pi).powu(ji);
            }
            acc += term;
        }
        acc
    }

    /// P_l(-p).
    pub fn at_minus_p(&self, l: usize, p: &[Complex64]) -> Complex64 {
        self.eval_impl(l, p, false)
    }

    /// Principal part P_{n;l}(-p).
    pub fn principal_at_minus_p(&self, l: usize, p: &[Complex64]) -> Complex64 {
        self.eval_impl(l, p, true)
    }

    pub fn at_minus_p_1d(&self, l: usize, p: Complex64) -> Complex64 {
        self.at_minus_p(l, &[p])
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        let mut s = self.clone();
        for c in &mut s.comps {
            for v in c.values_mut() {
                *v *= lambda;
            }
        }
        s
    }
}

/// One factor (∂^j f_l)^power of a nonlinear monomial.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct DerivFactor {
    pub component: usize,
    pub j: MultiIndex,
    pub power: u32,
}

/// b_{q,k}(x,t) f^k Π(∂^j f_l)^{q_{l,j}} in equation `equation`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearTerm {
    pub equation: usize,
    pub k: MultiIndex,
    pub q: Vec<DerivFactor>,
    pub coeff: RamifiedSeries<Complex64>,
}

impl NonlinearTerm {
    /// Σ |j| q_{l,j}: number of derivatives carried by the term.
    pub fn derivative_weight(&self) -> u32 {
        self.q.iter().map(|f| f.j.abs() * f.power).sum()
    }
    /// |q| = Σ q_{l,j}.
    pub fn q_abs(&self) -> u32 {
        self.q.iter().map(|f| f.power).sum()
    }
    pub fn k_abs(&self) -> u32 {
        self.k.abs()
    }
    pub fn label(&self) -> String {
        let q: Vec<String> = self.q.iter().map(|f| format!("{}@{}^{}", f.component, f.j, f.power)).collect();
        format!("eq {} k={} q=[{}]", self.equation, self.k, q.join(" "))
    }
    /// Key identifying q irrespective of k and the equation.
    pub fn q_key(&self) -> Vec<DerivFactor> {
        let mut q = self.q.clone();
        q.sort();
        q
    }
}

/// Exponent data for the small-time rescaled problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaledSetting {
    pub betas: Vec<Rational64>,
    pub gammas: Vec<Rational64>,
    pub omegas: Vec<Rational64>,
    pub beta: Rational64,
    /// Setting 2 (n̂ = n, P(-s) = s^n, analytic coefficient functions).
    pub analytic: bool,
}

impl ScaledSetting {
    pub fn n_hat(&self) -> Rational64 {
        self.betas[0] / self.gammas[0]
    }
}

/// A normalized problem.
#[derive(Debug, Clone, PartialEq)]
pub struct PDEProblem {
    pub d: usize,
    pub n: u32,
    pub m: usize,
    pub symbol: SymbolPolynomial,
    pub terms: Vec<NonlinearTerm>,
    pub forcing: Vec<RamifiedSeries<Complex64>>,
    pub initial: Vec<RamifiedSeries<Complex64>>,
    pub epsilon: f64,
    pub sector: SectorSpec,
    pub horizon: f64,
    pub ramification: Vec<u32>,
    pub setting: Option<ScaledSetting>,
    pub name: String,
}

/// A term breaking Σ|j|q_{l,j} ≤ n.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintViolation {
    pub term: String,
    pub weight: u32,
    pub n: u32,
}

impl PDEProblem {
    /// Scalar d = 1 problem with no nonlinearity.
    pub fn linear_1d(symbol: SymbolPolynomial, forcing: RamifiedSeries<Complex64>, initial: RamifiedSeries<Complex64>) -> Self {
        let n = symbol.n;
        let phi = PI / (2.0 * n as f64) * 0.5;
        let ram = forcing.ramification().max(initial.ramification());
        Self {
            d: 1,
            n,
            m: 1,
            symbol,
            terms: Vec::new(),
            forcing: vec![forcing],
            initial: vec![initial],
            epsilon: 1.0,
            sector: SectorSpec { phi, rho: 1.0, directions: vec![0.0], d: 1 },
            horizon: 1.0,
            ramification: vec![ram],
            setting: None,
            name: "linear".into(),
        }
    }

    /// Decay exponent α_r: smallest α with r, f_I = O(x^{-α}).
    pub fn alpha_r(&self) -> Option<Rational64> {
        self.forcing
            .iter()
            .chain(&self.initial)
            .filter_map(|s| s.max_exponent())
            .max()
            .map(|e| -e)
    }

    /// α_q per term: decay of the coefficient b_{q,k}.
    pub fn alpha_q(&self) -> Vec<(String, Option<Rational64>)> {
        self.terms.iter().map(|t| (t.label(), t.coeff.max_exponent().map(|e| -e))).collect()
    }

    /// Structural checks beyond the derivative budget.
    pub fn validate(&self) -> Vec<String> {
        let mut out = self.symbol.validate();
        if self.symbol.m() != self.m {
            out.push(format!("symbol has {} components, problem m = {}", self.symbol.m(), self.m));
        }
        out.extend(self.sector.validate(self.n));
        if let Some(a) = self.alpha_r() {
            if a < Rational64::one() {
                out.push(format!("decay exponent α_r = {a} < 1"));
            }
        }
        for t in &self.terms {
            if t.k.abs() == 0 && t.q.is_empty() {
                out.push(format!("{}: b_(0,0) must vanish (put it in the forcing)", t.label()));
            }
            if t.k.len() != self.m || t.equation >= self.m {
                out.push(format!("{}: index out of range for m = {}", t.label(), self.m));
            }
            if t.coeff.tag() != VarTag::X {
                out.push(format!("{}: coefficient must be an x-side series", t.label()));
            }
        }
        if self.horizon <= 0.0 {
            out.push("horizon T must be positive".into());
        }
        out
    }
}

/// Every nonzero term must carry at most n derivatives in total.
pub fn validate_constraint(problem: &PDEProblem) -> Vec<ConstraintViolation> {
    problem
        .terms
        .iter()
        .filter(|t| !t.coeff.is_zero() && t.derivative_weight() > problem.n)
        .map(|t| ConstraintViolation { term: t.label(), weight: t.derivative_weight(), n: problem.n })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeReport {
    pub ok: bool,
    /// C₀ = inf Re P_{n;l}(-p) over |p| = 1, |arg p_i| ≤ φ.
    pub c: f64,
    /// Beyond this radius Re P_l(-p) > (C₀/2)|p|^n on every sampled ray.
    pub r: f64,
    pub worst_ray: f64,
}

/// Margin below which the cone condition is treated as failing.
pub const CONE_MARGIN: f64 = 1e-9;

/// Unit-sphere sample points with |arg p_i| ≤ φ, as (modulus split, args).
fn sphere_samples(d: usize, phi: f64, sample_count: usize) -> Vec<Vec<Complex64>> {
    if d == 1 {
        return (0..sample_count)
            .map(|i| {
                let th = -phi + 2.0 * phi * i as f64 / (sample_count - 1) as f64;
                vec![Complex64::from_polar(1.0, th)]
            })
            .collect();
    }
    let per = ((sample_count as f64).powf(1.0 / (2 * d - 1) as f64).floor() as usize).max(4);
    let args: Vec<f64> = (0..per).map(|i| -phi + 2.0 * phi * i as f64 / (per - 1) as f64).collect();
    // Moduli on the positive orthant of the unit sphere via nested angles.
    let mut moduli: Vec<Vec<f64>> = vec![vec![1.0]];
    for _ in 1..d {
        let mut next = Vec::new();
        for m in &moduli {
            for i in 0..per {
                let a = 0.5 * PI * i as f64 / (per - 1) as f64;
                let mut v = m.clone();
                let last = v.pop().unwrap_or(1.0);
                v.push(last * a.cos());
                v.push(last * a.sin());
                next.push(v);
            }
        }
        moduli = next;
    }
    let mut out = Vec::new();
    for m in &moduli {
        let mut combos: Vec<Vec<Complex64>> = vec![Vec::new()];
        for &mi in m {
            let mut next = Vec::new();
            for c in &combos {
                for &a in &args {
                    let mut v = c.clone();
                    v.push(Complex64::from_polar(mi, a));
                    next.push(v);
                }
            }
            combos = next;
        }
        out.extend(combos);
    }
    out
}

/// Samples Re P_{n;l}(-p) on the compact arc/sphere; if positive, scans shells
/// |p| = r for the radius past which the full symbol dominates (C₀/2)|p|^n.
pub fn check_cone_condition(symbol: &SymbolPolynomial, phi: f64, sample_count: usize) -> Result<ConeReport> {
    if symbol.comps.iter().all(|c| c.iter().all(|(j, v)| j.abs() != symbol.n || v.norm() == 0.0)) {
        return Err(BorelError::InvalidProblem("degenerate symbol: principal part vanishes".into()));
    }
    let sample_count = sample_count.max(64);
    let pts = sphere_samples(symbol.d, phi, sample_count);
    let mut c0 = f64::INFINITY;
    let mut worst = 0.0;
    for l in 0..symbol.m() {
        for p in &pts {
            let v = symbol.principal_at_minus_p(l, p).re;
            if v < c0 {
                c0 = v;
                worst = p[0].arg();
            }
        }
    }
    if c0 <= CONE_MARGIN {
        return Ok(ConeReport { ok: false, c: c0, r: f64::INFINITY, worst_ray: worst });
    }
    let n = symbol.n as i32;
    let shells: Vec<f64> = (0..=160).map(|k| 1e-4 * 10f64.powf(k as f64 / 16.0)).collect();
    let mut r = f64::INFINITY;
    for &rad in shells.iter().rev() {
        let ok = (0..symbol.m()).all(|l| {
            pts.iter().all(|p| {
                let q: Vec<Complex64> = p.iter().map(|z| z * rad).collect();
                symbol.at_minus_p(l, &q).re > 0.5 * c0 * rad.powi(n)
            })
        });
        if ok {
            r = rad;
        } else {
            break;
        }
    }
    Ok(ConeReport { ok: true, c: c0, r, worst_ray: worst })
}

/// ρ₀-independent helper: the real part of P(-p) on a ray, used by the solver.
pub fn symbol_real_min_on_ray(symbol: &SymbolPolynomial, theta: f64, s_max: f64) -> f64 {
    let mut lo = f64::INFINITY;
    for i in 0..=400 {
        let s = s_max * i as f64 / 400.0;
        for l in 0..symbol.m() {
            lo = lo.min(symbol.at_minus_p_1d(l, Complex64::from_polar(s, theta)).re);
        }
    }
    lo
}

/// Rational helper.
pub fn rat(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

pub fn rat_f(r: Rational64) -> f64 {
    rat_to_f64(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::RamifiedMonomial;

    fn c1(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    fn desk_with_term(j: u32, power: u32) -> PDEProblem {
        let f = RamifiedSeries::monomial(VarTag::X, rat(-2, 1), c1(1.0)).unwrap();
        let mut p = PDEProblem::linear_1d(SymbolPolynomial::minus_d_pow(3), f, RamifiedSeries::zero(VarTag::X));
        p.terms.push(NonlinearTerm {
            equation: 0,
            k: MultiIndex(vec![0]),
            q: vec![DerivFactor { component: 0, j: MultiIndex(vec![j]), power }],
            coeff: RamifiedSeries::from_terms(VarTag::X, vec![RamifiedMonomial::constant(rat(-1, 1), c1(1.0))]).unwrap(),
        });
        p
    }

    #[test]
    fn constraint_counts() {
        assert!(validate_constraint(&desk_with_term(1, 2)).is_empty());
        assert!(validate_constraint(&desk_with_term(3, 1)).is_empty());
        let v = validate_constraint(&desk_with_term(2, 2));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].weight, 4);
    }

    #[test]
    fn cone_examples() {
        for n in 2..=5u32 {
            let phi = PI / (2.0 * n as f64) - 0.01;
            let rep = check_cone_condition(&SymbolPolynomial::minus_d_pow(n), phi, 512).unwrap();
            assert!(rep.ok);
            assert!(rep.c >= (n as f64 * phi).cos() - 1e-9);
            assert!((rep.c - (n as f64 * phi).cos()).abs() < 1e-9);
        }
        let heat = SymbolPolynomial::scalar_1d(&[(2, c1(-1.0))]);
        // Re P(-p) = -p² on the real axis.
        assert!(!check_cone_condition(&heat, 0.3, 512).unwrap().ok);
        let cubic = SymbolPolynomial::minus_d_pow(3);
        assert!(!check_cone_condition(&cubic, PI / 4.0, 512).unwrap().ok);
        let zero = SymbolPolynomial::scalar_1d(&[(3, c1(0.0)), (1, c1(1.0))]);
        let mut z = zero.clone();
        z.n = 3;
        assert!(check_cone_condition(&z, 0.3, 512).is_err());
    }

    #[test]
    fn cone_with_lower_order_terms_has_finite_radius() {
        // P(-p) = p³ - 5p² + 1
        let s = SymbolPolynomial::scalar_1d(&[(3, c1(-1.0)), (2, c1(-5.0)), (0, c1(1.0))]);
        let rep = check_cone_condition(&s, 0.4, 512).unwrap();
        assert!(rep.ok);
        // Worst ray θ = 0.4: 0.181 r³ > 5 cos(0.8) r² needs r ≳ 19.2.
        assert!(rep.r > 19.0 && rep.r < 23.0, "{}", rep.r);
    }

    #[test]
    fn two_dimensional_symbol() {
        // P(∂) = -∂_1³ - ∂_2³, so P(-p) = p_1³ + p_2³.
        let mut m = BTreeMap::new();
        m.insert(MultiIndex(vec![3, 0]), c1(-1.0));
        m.insert(MultiIndex(vec![0, 3]), c1(-1.0));
        let s = SymbolPolynomial { n: 3, d: 2, comps: vec![m] };
        let rep = check_cone_condition(&s, 0.3, 4096).unwrap();
        assert!(rep.ok);
        assert!(rep.c > 0.0);
    }
}

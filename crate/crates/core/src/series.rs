//! Finite ramified power series in x (literal powers x^e) or in the Borel
//! variable p (powers p^e, e > -1), with polynomial dependence on t.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{BorelError, Result};
use crate::special::ln_gamma;

/// Scalar coefficients: floating complex for numerics, big rationals for exact work.
pub trait Coeff:
    Clone
    + PartialEq
    + fmt::Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn from_ratio(r: Rational64) -> Self;
    fn to_c64(&self) -> Complex64;
}

impl Coeff for Complex64 {
    fn from_ratio(r: Rational64) -> Self {
        Complex64::new(*r.numer() as f64 / *r.denom() as f64, 0.0)
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
}

impl Coeff for BigRational {
    fn from_ratio(r: Rational64) -> Self {
        BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(big_to_f64(self), 0.0)
    }
}

pub fn big_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Huge numerator or denominator: go through logs of the digit strings.
    let shift = r.numer().bits().max(r.denom().bits()) as i64 - 60;
    let n = (r.numer() >> shift.max(0) as usize).to_f64().unwrap_or(0.0);
    let d = (r.denom() >> shift.max(0) as usize).to_f64().unwrap_or(1.0);
    n / d
}

pub fn rat_to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Polynomial in t with coefficients c[k] of t^k.
#[derive(Debug, Clone, PartialEq)]
pub struct TPoly<C: Coeff> {
    pub c: Vec<C>,
}

impl<C: Coeff> TPoly<C> {
    pub fn zero() -> Self {
        Self { c: Vec::new() }
    }
    pub fn constant(v: C) -> Self {
        Self::from_coeffs(vec![v])
    }
    /// v·t^k
    pub fn monomial(v: C, k: usize) -> Self {
        let mut c = vec![C::zero(); k + 1];
        c[k] = v;
        Self::from_coeffs(c)
    }
    pub fn from_coeffs(mut c: Vec<C>) -> Self {
        while c.last().is_some_and(|v| v.is_zero()) {
            c.pop();
        }
        Self { c }
    }
    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }
    /// Degree; None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }
    /// Lowest power of t with nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.c.iter().position(|v| !v.is_zero())
    }
    pub fn coeff(&self, k: usize) -> C {
        self.c.get(k).cloned().unwrap_or_else(C::zero)
    }
    pub fn scale(&self, s: &C) -> Self {
        Self::from_coeffs(self.c.iter().map(|v| v.clone() * s.clone()).collect())
    }
    pub fn deriv(&self) -> Self {
        Self::from_coeffs(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, v)| v.clone() * C::from_ratio(Rational64::from_integer(k as i64)))
                .collect(),
        )
    }
    /// Multiply by t^k.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = vec![C::zero(); k];
        c.extend(self.c.iter().cloned());
        Self { c }
    }
    /// Drop powers above `max_deg`.
    pub fn truncate(&self, max_deg: usize) -> Self {
        Self::from_coeffs(self.c.iter().take(max_deg + 1).cloned().collect())
    }
    pub fn eval(&self, t: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for v in self.c.iter().rev() {
            acc = acc * t + v.to_c64();
        }
        acc
    }
    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> TPoly<D> {
        TPoly::from_coeffs(self.c.iter().map(f).collect())
    }
}

impl<C: Coeff> Add for &TPoly<C> {
    type Output = TPoly<C>;
    fn add(self, o: &TPoly<C>) -> TPoly<C> {
        let n = self.c.len().max(o.c.len());
        TPoly::from_coeffs((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }
}

impl<C: Coeff> Sub for &TPoly<C> {
    type Output = TPoly<C>;
    fn sub(self, o: &TPoly<C>) -> TPoly<C> {
        let n = self.c.len().max(o.c.len());
        TPoly::from_coeffs((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }
}

impl<C: Coeff> Mul for &TPoly<C> {
    type Output = TPoly<C>;
    fn mul(self, o: &TPoly<C>) -> TPoly<C> {
        if self.is_zero() || o.is_zero() {
            return TPoly::zero();
        }
        let mut c = vec![C::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] = c[i + j].clone() + a.clone() * b.clone();
            }
        }
        TPoly::from_coeffs(c)
    }
}

/// Which variable a series is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum VarTag {
    /// Physical variable: monomials c·x^e.
    X,
    /// Borel variable: monomials c·p^e with e > -1.
    P,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RamifiedMonomial<C: Coeff> {
    pub exponent: Rational64,
    pub coeff: TPoly<C>,
}

impl<C: Coeff> RamifiedMonomial<C> {
    pub fn new(exponent: Rational64, coeff: TPoly<C>) -> Self {
        Self { exponent, coeff }
    }
    pub fn constant(exponent: Rational64, c: C) -> Self {
        Self { exponent, coeff: TPoly::constant(c) }
    }
}

/// Sorted, merged finite sum of monomials on the exponent lattice (1/N)ℤ.
#[derive(Debug, Clone, PartialEq)]
pub struct RamifiedSeries<C: Coeff> {
    terms: Vec<RamifiedMonomial<C>>,
    ramification: u32,
    tag: VarTag,
}

fn lcm_u32(a: u32, b: u32) -> u32 {
    (a as u64).lcm(&(b as u64)) as u32
}

impl<C: Coeff> RamifiedSeries<C> {
    pub fn zero(tag: VarTag) -> Self {
        Self { terms: Vec::new(), ramification: 1, tag }
    }

    /// Builds a series; exponents are merged and sorted, zero terms dropped,
    /// and the ramification is the lcm of all exponent denominators.
    pub fn from_terms(tag: VarTag, terms: Vec<RamifiedMonomial<C>>) -> Result<Self> {
        let mut map: BTreeMap<Rational64, TPoly<C>> = BTreeMap::new();
        for t in terms {
            let e = map.entry(t.exponent).or_insert_with(TPoly::zero);
            *e = &*e + &t.coeff;
        }
        let terms: Vec<_> = map
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(e, c)| RamifiedMonomial::new(e, c))
            .collect();
        if tag == VarTag::P {
            if let Some(bad) = terms.iter().find(|t| t.exponent <= -Rational64::one()) {
                return Err(BorelError::NonIntegrable(rat_to_f64(bad.exponent)));
            }
        }
        let ramification = terms.iter().fold(1u32, |n, t| lcm_u32(n, *t.exponent.denom() as u32));
        Ok(Self { terms, ramification, tag })
    }

    /// Same as `from_terms` but with a prescribed ambient ramification, which
    /// must be a multiple of every exponent denominator.
    pub fn with_ramification(tag: VarTag, terms: Vec<RamifiedMonomial<C>>, n: u32) -> Result<Self> {
        let mut s = Self::from_terms(tag, terms)?;
        if n % s.ramification != 0 {
            return Err(BorelError::Ramification(n, s.ramification));
        }
        s.ramification = n;
        Ok(s)
    }

    pub fn monomial(tag: VarTag, exponent: Rational64, c: C) -> Result<Self> {
        Self::from_terms(tag, vec![RamifiedMonomial::constant(exponent, c)])
    }

    pub fn terms(&self) -> &[RamifiedMonomial<C>] {
        &self.terms
    }
    pub fn ramification(&self) -> u32 {
        self.ramification
    }
    pub fn tag(&self) -> VarTag {
        self.tag
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn len(&self) -> usize {
        self.terms.len()
    }
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn rebuild(&self, terms: Vec<RamifiedMonomial<C>>) -> Self {
        let mut s = Self::from_terms(self.tag, terms).expect("tag-preserving rebuild");
        s.ramification = lcm_u32(s.ramification, self.ramification);
        s
    }

    fn check_tags(&self, o: &Self) -> Result<()> {
        if self.tag != o.tag {
            return Err(BorelError::MixedTags);
        }
        Ok(())
    }

    pub fn try_add(&self, o: &Self) -> Result<Self> {
        self.check_tags(o)?;
        let mut t = self.terms.clone();
        t.extend(o.terms.iter().cloned());
        let mut s = self.rebuild(t);
        s.ramification = lcm_u32(s.ramification, o.ramification);
        Ok(s)
    }

    pub fn try_sub(&self, o: &Self) -> Result<Self> {
        self.try_add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-C::one())
    }

    pub fn scale(&self, s: &C) -> Self {
        self.rebuild(
            self.terms
                .iter()
                .map(|m| RamifiedMonomial::new(m.exponent, m.coeff.scale(s)))
                .collect(),
        )
    }

    pub fn scale_t(&self, p: &TPoly<C>) -> Self {
        self.rebuild(
            self.terms
                .iter()
                .map(|m| RamifiedMonomial::new(m.exponent, &m.coeff * p))
                .collect(),
        )
    }

    /// Pointwise product (exponents add). For x-side series this is the
    /// ordinary product; for p-side it is the pointwise product, not convolution.
    pub fn try_mul(&self, o: &Self) -> Result<Self> {
        self.check_tags(o)?;
        let mut out = Vec::with_capacity(self.terms.len() * o.terms.len());
        for a in &self.terms {
            for b in &o.terms {
                out.push(RamifiedMonomial::new(a.exponent + b.exponent, &a.coeff * &b.coeff));
            }
        }
        let mut s = Self::from_terms(self.tag, out)?;
        s.ramification = lcm_u32(s.ramification, lcm_u32(self.ramification, o.ramification));
        Ok(s)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::from_terms(self.tag, vec![RamifiedMonomial::constant(Rational64::zero(), C::one())])
            .expect("constant");
        for _ in 0..k {
            acc = acc.try_mul(self).expect("same tag");
        }
        acc
    }

    /// Multiply by the monomial v^e of the series variable.
    pub fn shift_exponent(&self, e: Rational64) -> Result<Self> {
        Self::from_terms(
            self.tag,
            self.terms.iter().map(|m| RamifiedMonomial::new(m.exponent + e, m.coeff.clone())).collect(),
        )
    }

    /// d/dv of the series in its own variable.
    pub fn deriv(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|m| !m.exponent.is_zero())
            .map(|m| RamifiedMonomial::new(m.exponent - 1, m.coeff.scale(&C::from_ratio(m.exponent))))
            .collect();
        Self::from_terms(self.tag, terms).unwrap_or_else(|_| Self::zero(self.tag))
    }

    pub fn deriv_t(&self) -> Self {
        self.rebuild(
            self.terms
                .iter()
                .map(|m| RamifiedMonomial::new(m.exponent, m.coeff.deriv()))
                .collect(),
        )
    }

    pub fn map_coeffs(&self, f: impl Fn(&TPoly<C>) -> TPoly<C>) -> Self {
        self.rebuild(self.terms.iter().map(|m| RamifiedMonomial::new(m.exponent, f(&m.coeff))).collect())
    }

    pub fn convert<D: Coeff>(&self, f: impl Fn(&C) -> D) -> RamifiedSeries<D> {
        let terms = self.terms.iter().map(|m| RamifiedMonomial::new(m.exponent, m.coeff.map(&f))).collect();
        let mut s = RamifiedSeries::from_terms(self.tag, terms).expect("conversion keeps exponents");
        s.ramification = lcm_u32(s.ramification, self.ramification);
        s
    }

    /// Lowest exponent present.
    pub fn min_exponent(&self) -> Option<Rational64> {
        self.terms.first().map(|m| m.exponent)
    }
    pub fn max_exponent(&self) -> Option<Rational64> {
        self.terms.last().map(|m| m.exponent)
    }

    /// Evaluate at a complex point (principal branch) and real time.
    pub fn eval(&self, v: Complex64, t: f64) -> Complex64 {
        let lv = v.ln();
        self.terms
            .iter()
            .map(|m| m.coeff.eval(t) * (lv * rat_to_f64(m.exponent)).exp())
            .sum()
    }

    /// Evaluate at v = r·e^{iθ} with θ taken literally (not reduced mod 2π);
    /// used to move between sheets of the ramified function.
    pub fn eval_polar(&self, r: f64, theta: f64, t: f64) -> Complex64 {
        let lr = r.ln();
        self.terms
            .iter()
            .map(|m| {
                let e = rat_to_f64(m.exponent);
                m.coeff.eval(t) * Complex64::from_polar((e * lr).exp(), e * theta)
            })
            .sum()
    }
}

impl RamifiedSeries<Complex64> {
    /// Term-wise Borel transform x^{-α} ↦ p^{α-1}/Γ(α).
    pub fn borel(&self) -> Result<Self> {
        if self.tag != VarTag::X {
            return Err(BorelError::MixedTags);
        }
        let mut out = Vec::with_capacity(self.terms.len());
        for m in &self.terms {
            let b = borel_of_monomial(-m.exponent)?;
            out.push(RamifiedMonomial::new(b.exponent, m.coeff.scale(&b.coeff.coeff(0))));
        }
        let mut s = Self::from_terms(VarTag::P, out)?;
        s.ramification = lcm_u32(s.ramification, self.ramification);
        Ok(s)
    }

    /// Series coefficients as text, one term per line:
    /// `re im num/den [tdeg]`, one line per t-power.
    pub fn to_lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        for m in &self.terms {
            for (k, c) in m.coeff.c.iter().enumerate() {
                if c.norm() == 0.0 {
                    continue;
                }
                let e = format!("{}/{}", m.exponent.numer(), m.exponent.denom());
                if k == 0 {
                    out.push(format!("{:e} {:e} {e}", c.re, c.im));
                } else {
                    out.push(format!("{:e} {:e} {e} {k}", c.re, c.im));
                }
            }
        }
        out
    }

    pub fn from_lines<'a>(tag: VarTag, lines: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let mut terms = Vec::new();
        for (i, line) in lines.into_iter().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            let perr = |col: usize, msg: &str| BorelError::Parse { line: i + 1, col, msg: msg.into() };
            if f.len() < 3 || f.len() > 4 {
                return Err(perr(1, "expected `re im num/den [tdeg]`"));
            }
            let re: f64 = f[0].parse().map_err(|_| perr(1, "bad real part"))?;
            let im: f64 = f[1].parse().map_err(|_| perr(2, "bad imaginary part"))?;
            let e = parse_rational(f[2]).ok_or_else(|| perr(3, "exponent must be an exact fraction"))?;
            let k: usize = match f.get(3) {
                Some(s) => s.parse().map_err(|_| perr(4, "bad t-degree"))?,
                None => 0,
            };
            terms.push(RamifiedMonomial::new(e, TPoly::monomial(Complex64::new(re, im), k)));
        }
        Self::from_terms(tag, terms)
    }
}

impl fmt::Display for RamifiedSeries<Complex64> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in self.to_lines() {
            writeln!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Parses "a/b" or an integer; decimals are rejected.
pub fn parse_rational(s: &str) -> Option<Rational64> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().ok()?;
        let d: i64 = d.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        Some(Rational64::new(n, d))
    } else {
        s.parse::<i64>().ok().map(Rational64::from_integer)
    }
}

/// Borel transform of x^{-α}: p^{α-1}/Γ(α).
pub fn borel_of_monomial(alpha: Rational64) -> Result<RamifiedMonomial<Complex64>> {
    if alpha <= Rational64::zero() {
        return Err(BorelError::NonTransformable(format!("{alpha}")));
    }
    let a = rat_to_f64(alpha);
    let c = (-ln_gamma(a)).exp();
    Ok(RamifiedMonomial::constant(alpha - 1, Complex64::new(c, 0.0)))
}

/// Γ(a+1)Γ(b+1)/Γ(a+b+2), the constant in p^a * p^b = const·p^{a+b+1}.
pub fn convolution_constant(a: f64, b: f64) -> f64 {
    (ln_gamma(a + 1.0) + ln_gamma(b + 1.0) - ln_gamma(a + b + 2.0)).exp()
}

/// Exact Borel-plane convolution of two p-side series.
pub fn convolve_series(
    a: &RamifiedSeries<Complex64>,
    b: &RamifiedSeries<Complex64>,
) -> Result<RamifiedSeries<Complex64>> {
    if a.tag != VarTag::P || b.tag != VarTag::P {
        return Err(BorelError::MixedTags);
    }
    let mut out = Vec::with_capacity(a.terms.len() * b.terms.len());
    for x in &a.terms {
        for y in &b.terms {
            let k = convolution_constant(rat_to_f64(x.exponent), rat_to_f64(y.exponent));
            out.push(RamifiedMonomial::new(
                x.exponent + y.exponent + 1,
                (&x.coeff * &y.coeff).scale(&Complex64::new(k, 0.0)),
            ));
        }
    }
    let mut s = RamifiedSeries::from_terms(VarTag::P, out)?;
    s.ramification = lcm_u32(s.ramification, lcm_u32(a.ramification, b.ramification));
    Ok(s)
}

/// Samples of a ramified function on every sheet, at common points.
/// `values[j]` holds G at the points continued by e^{2πi j} (per dimension).
#[derive(Debug, Clone)]
pub struct SheetSamples {
    pub ramification: Vec<u32>,
    /// Points as (modulus, argument) per dimension, on the principal sheet.
    pub points: Vec<Vec<(f64, f64)>>,
    pub values: BTreeMap<Vec<u32>, Vec<Complex64>>,
}

impl SheetSamples {
    /// Samples `g` on every sheet; `g` receives (modulus, unwound argument) per dimension.
    pub fn from_fn(
        ramification: Vec<u32>,
        points: Vec<Vec<(f64, f64)>>,
        g: impl Fn(&[(f64, f64)]) -> Complex64,
    ) -> Self {
        let mut values = BTreeMap::new();
        for j in sheet_indices(&ramification) {
            let v = points
                .iter()
                .map(|pt| {
                    let shifted: Vec<(f64, f64)> = pt
                        .iter()
                        .zip(&j)
                        .map(|(&(r, a), &ji)| (r, a + 2.0 * std::f64::consts::PI * ji as f64))
                        .collect();
                    g(&shifted)
                })
                .collect();
            values.insert(j, v);
        }
        Self { ramification, points, values }
    }
}

/// All index vectors 0 ≤ j < N in lexicographic order.
pub fn sheet_indices(n: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for &ni in n {
        let mut next = Vec::new();
        for prefix in &out {
            for j in 0..ni {
                let mut v = prefix.clone();
                v.push(j);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Result of splitting G = Σ_j p^{j/N} A_j(p) into single-valued components.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub components: BTreeMap<Vec<u32>, Vec<Complex64>>,
    /// Largest ratio of the scalings |p_i|^{j/N} across components.
    pub condition: f64,
}

/// Recovers the components A_j at each sample point. Dimensions are peeled in
/// ascending order; each step inverts the roots-of-unity Vandermonde matrix.
pub fn decompose_ramified(samples: &SheetSamples) -> Result<Decomposition> {
    let n = &samples.ramification;
    let d = n.len();
    let idx = sheet_indices(n);
    for j in &idx {
        if !samples.values.contains_key(j) {
            return Err(BorelError::Domain(format!("missing sheet {j:?}")));
        }
    }
    let np = samples.points.len();
    let mut cond = 1.0f64;
    for pt in &samples.points {
        for (i, &(r, _)) in pt.iter().enumerate() {
            let e = (n[i] - 1) as f64 / n[i] as f64;
            let c = r.powf(e).max(r.powf(-e));
            cond = cond.max(c);
        }
    }
    if cond > 1e12 {
        return Err(BorelError::IllConditioned(cond));
    }
    // current[index] = per-point values; indices are sheet index in
    // not-yet-processed dims and component index in processed ones.
    let mut current: BTreeMap<Vec<u32>, Vec<Complex64>> = samples.values.clone();
    for dim in 0..d {
        let nd = n[dim];
        let mut next = BTreeMap::new();
        for key in &idx {
            let comp = key[dim];
            let mut acc = vec![Complex64::new(0.0, 0.0); np];
            for k in 0..nd {
                let mut src = key.clone();
                src[dim] = k;
                let vals = &current[&src];
                // G_k = Σ_j (p e^{2πik})^{j/N} A_j: invert by the conjugate DFT.
                let w = Complex64::from_polar(
                    1.0,
                    -2.0 * std::f64::consts::PI * (comp as f64) * (k as f64) / nd as f64,
                );
                for (a, v) in acc.iter_mut().zip(vals) {
                    *a += w * v;
                }
            }
            for (pi, a) in acc.iter_mut().enumerate() {
                let (r, arg) = samples.points[pi][dim];
                let e = comp as f64 / nd as f64;
                *a /= Complex64::from_polar(r.powf(e), e * arg) * nd as f64;
            }
            next.insert(key.clone(), acc);
        }
        current = next;
    }
    Ok(Decomposition { components: current, condition: cond })
}

/// Reassembles Σ_j p^{j/N} A_j on the principal sheet.
pub fn reconstruct(samples_points: &[Vec<(f64, f64)>], n: &[u32], dec: &Decomposition) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); samples_points.len()];
    for (key, vals) in &dec.components {
        for (pi, pt) in samples_points.iter().enumerate() {
            let mut f = Complex64::new(1.0, 0.0);
            for (dim, &(r, arg)) in pt.iter().enumerate() {
                let e = key[dim] as f64 / n[dim] as f64;
                f *= Complex64::from_polar(r.powf(e), e * arg);
            }
            out[pi] += f * vals[pi];
        }
    }
    out
}

/// Convenience for exact work.
pub fn brat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn big_of_rat(r: Rational64) -> BigRational {
    BigRational::from_ratio(r)
}

pub fn rat_abs(r: Rational64) -> Rational64 {
    r.abs()
}

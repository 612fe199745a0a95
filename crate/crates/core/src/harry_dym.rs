//! The modified Harry-Dym equation H_t = -H³/2 + H³H_zzz, H(z,0) = z^{-1/2}:
//! small-time series, its normal form for the remainder f with
//! H = g_N + x^{-2} f and x = (2/3) z^{3/2}, and the scaled-variable data.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{BorelError, Result};
use crate::problem::{rat, DerivFactor, MultiIndex, NonlinearTerm, PDEProblem, ScaledSetting, SectorSpec, SymbolPolynomial};
use crate::series::{big_to_f64, brat, rat_to_f64, RamifiedMonomial, RamifiedSeries, TPoly, VarTag};
use crate::solver::{lattice_omega, m_qk, scaled_solve, setting_alpha_table, SolveConfig, SolveReport};
use crate::transforms::laplace_ray_at;

/// Exact series in z (tagged X) with t-polynomial coefficients.
pub type ZSeries = RamifiedSeries<BigRational>;
type XC = RamifiedSeries<Complex64>;

pub const MAX_ORDER: usize = 12;

#[derive(Debug, Clone)]
pub struct HarryDymCoeffs {
    /// H_0..H_N as series in z.
    pub h: Vec<ZSeries>,
    /// g_N = Σ tⁿ H_n rewritten in x.
    pub g_n: XC,
    /// Lowest total degree of the residual polynomial.
    pub residual_order: usize,
}

fn zmono(e: Rational64, c: BigRational, tdeg: usize) -> ZSeries {
    RamifiedSeries::from_terms(VarTag::X, vec![RamifiedMonomial::new(e, TPoly::monomial(c, tdeg))]).expect("single monomial")
}

fn zsum(a: &ZSeries, b: &ZSeries) -> ZSeries {
    a.try_add(b).expect("same tag")
}

fn zmul(a: &ZSeries, b: &ZSeries) -> ZSeries {
    a.try_mul(b).expect("same tag")
}

fn d3(s: &ZSeries) -> ZSeries {
    s.deriv().deriv().deriv()
}

/// H_0..H_N from Taylor matching in t:
/// (n+1) H_{n+1} = -½ [H³]_n + [H³ H''']_n.
pub fn harry_dym_h(n_max: usize) -> Result<Vec<ZSeries>> {
    if n_max > MAX_ORDER {
        return Err(BorelError::Domain(format!("order {n_max} exceeds {MAX_ORDER}")));
    }
    let mut h = vec![zmono(rat(-1, 2), BigRational::one(), 0)];
    let mut hppp = vec![d3(&h[0])];
    let mut sq: Vec<ZSeries> = Vec::new();
    let mut cube: Vec<ZSeries> = Vec::new();
    for n in 0..n_max {
        let s: ZSeries = (0..=n).map(|i| zmul(&h[i], &h[n - i])).fold(ZSeries::zero(VarTag::X), |a, b| zsum(&a, &b));
        sq.push(s);
        let c = (0..=n).map(|i| zmul(&sq[i], &h[n - i])).fold(ZSeries::zero(VarTag::X), |a, b| zsum(&a, &b));
        cube.push(c);
        let d = (0..=n).map(|i| zmul(&cube[i], &hppp[n - i])).fold(ZSeries::zero(VarTag::X), |a, b| zsum(&a, &b));
        let rhs = zsum(&cube[n].scale(&brat(-1, 2)), &d);
        let next = rhs.scale(&brat(1, n as i64 + 1));
        hppp.push(d3(&next));
        h.push(next);
    }
    Ok(h)
}

/// Checks z^{1/2} H_n = 𝔥_(n)(z^{-9/2}, z^{-1}), homogeneous of degree n.
/// Returns the (a, b) pairs present, or the offending exponent.
pub fn structure_check(h: &ZSeries, n: usize) -> std::result::Result<Vec<(usize, usize)>, Rational64> {
    let mut out = Vec::new();
    for m in h.terms() {
        // e + 1/2 = -9a/2 - b with a + b = n  ⇒  a = -2(e + 1/2 + n)/7.
        let a = -(m.exponent + rat(1, 2) + n as i64) * rat(2, 7);
        if !a.is_integer() || a < Rational64::zero() || a > Rational64::from_integer(n as i64) || m.coeff.degree() != Some(0) {
            return Err(m.exponent);
        }
        let a = a.to_integer() as usize;
        out.push((a, n - a));
    }
    Ok(out)
}

/// z^e ↦ (3/2)^{2e/3} x^{2e/3}, since z = (3x/2)^{2/3}.
pub fn z_to_x(s: &ZSeries) -> XC {
    let terms = s
        .terms()
        .iter()
        .map(|m| {
            let e = m.exponent * rat(2, 3);
            let f = 1.5f64.powf(rat_to_f64(e));
            RamifiedMonomial::new(e, m.coeff.map(|c| Complex64::new(big_to_f64(c) * f, 0.0)))
        })
        .collect();
    RamifiedSeries::with_ramification(VarTag::X, terms, 3).expect("x-side exponents")
}

/// x^m = (2/3)^m z^{3m/2}.
fn xpow(m: i64, c: BigRational) -> ZSeries {
    let base = brat(2, 3);
    let f = if m >= 0 { num_traits::pow(base, m as usize) } else { num_traits::pow(base.recip(), (-m) as usize) };
    zmono(rat(3 * m, 2), c * f, 0)
}

/// g_N = Σ_{n≤N} tⁿ H_n in z.
pub fn g_z(h: &[ZSeries]) -> ZSeries {
    h.iter()
        .enumerate()
        .map(|(n, s)| s.scale_t(&TPoly::monomial(BigRational::one(), n)))
        .fold(ZSeries::zero(VarTag::X), |a, b| zsum(&a, &b))
}

/// 𝒩(H) = H_t + H³/2 - H³ H_zzz.
pub fn operator_z(g: &ZSeries) -> ZSeries {
    let c = g.pow(3);
    let a = zsum(&g.deriv_t(), &c.scale(&brat(1, 2)));
    zsum(&a, &zmul(&c, &d3(g)).neg())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub n: usize,
    /// Lowest and highest total degree of 𝔭 in t𝒩(g_N) = x^{-1/3} 𝔭(t x^{-3}, t x^{-2/3}).
    pub lowest_degree: usize,
    pub highest_degree: usize,
    pub monomials: usize,
}

/// Residual of g_N, classified by total degree in (t x^{-3}, t x^{-2/3}).
pub fn harry_dym_residual(n: usize) -> Result<ResidualReport> {
    if n == 0 {
        return Err(BorelError::Domain("residual needs N ≥ 1".into()));
    }
    let h = harry_dym_h(n)?;
    let res = operator_z(&g_z(&h[..=n]));
    let (mut lo, mut hi, mut count) = (usize::MAX, 0, 0);
    for m in res.terms() {
        for (k, c) in m.coeff.c.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            // t^k z^e ∝ t^{-1} x^{-1/3} x₁^a x₂^b with a + b = k + 1, e = -3/2 - k - 7a/2.
            let a = -(m.exponent + rat(3, 2) + k as i64) * rat(2, 7);
            if !a.is_integer() || a < Rational64::zero() || a > Rational64::from_integer(k as i64 + 1) {
                return Err(BorelError::Domain(format!("residual monomial t^{k} z^{} off the lattice", m.exponent)));
            }
            lo = lo.min(k + 1);
            hi = hi.max(k + 1);
            count += 1;
        }
    }
    Ok(ResidualReport { n, lowest_degree: lo, highest_degree: hi, monomials: count })
}

pub fn harry_dym_series(n: usize) -> Result<HarryDymCoeffs> {
    let h = harry_dym_h(n)?;
    let g_n = z_to_x(&g_z(&h));
    let residual_order = if n >= 1 { harry_dym_residual(n)?.lowest_degree } else { 1 };
    Ok(HarryDymCoeffs { h, g_n, residual_order })
}

fn binom(n: u32, k: u32) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

/// ∂^m x^{-2} = (-2)(-3)...(-1-m) x^{-2-m}.
fn dx_inv_sq(m: u32) -> (i64, i64) {
    ((0..m as i64).fold(1, |acc, i| acc * (-2 - i)), -2 - m as i64)
}

/// Coefficient d_l of f^{(l)} in D(x^{-2} f), D = (3x/2)∂³ + (3/2)∂² - (1/(6x))∂ = ∂_z³.
fn d_coeffs() -> Vec<ZSeries> {
    // (power of x, coefficient, derivative order) for the three parts of D.
    let parts = [(1i64, brat(3, 2), 3u32), (0, brat(3, 2), 2), (-1, brat(-1, 6), 1)];
    (0..=3u32)
        .map(|l| {
            let mut acc = ZSeries::zero(VarTag::X);
            for (xp, c, i) in &parts {
                if l > *i {
                    continue;
                }
                let (num, e) = dx_inv_sq(i - l);
                let coef = c.clone() * BigRational::from_integer(BigInt::from(binom(*i, l) * num));
                acc = zsum(&acc, &xpow(xp + e, coef));
            }
            acc
        })
        .collect()
}

/// Exponent data of the remainder equation.
pub fn harry_dym_setting() -> ScaledSetting {
    ScaledSetting {
        betas: vec![rat(3, 1), rat(2, 3)],
        gammas: vec![rat(1, 1), rat(1, 1)],
        omegas: vec![rat(5, 3)],
        beta: rat(5, 3),
        analytic: true,
    }
}

/// Normal form for f with H = g_N + x^{-2} f: f_t - f_xxx = r + Σ b_{q,k} f^k ∂^j f,
/// from f_t = -x²𝒩(g) - x²[Ñ(g + x^{-2}f) - Ñ(g)], Ñ(H) = H³/2 - H³ ∂_z³H.
pub fn harry_dym_problem(n: usize) -> Result<PDEProblem> {
    if n < 3 {
        return Err(BorelError::Domain("the remainder equation needs N ≥ 3".into()));
    }
    let h = harry_dym_h(n)?;
    let g = g_z(&h);
    let x2 = xpow(2, BigRational::one());
    // r = -x² 𝒩(g).
    let forcing = z_to_x(&zmul(&x2, &operator_z(&g)).neg());
    let half_minus = zsum(&zmono(Rational64::zero(), brat(1, 2), 0), &d3(&g).neg());
    let dl = d_coeffs();
    // -x² C(3,k) g^{3-k} x^{-2k}
    let pre: Vec<ZSeries> = (0..=3u32)
        .map(|k| zmul(&zmul(&x2, &g.pow(3 - k)), &xpow(-2 * k as i64, BigRational::from_integer(BigInt::from(-binom(3, k))))))
        .collect();
    let mut q0: BTreeMap<u32, ZSeries> = BTreeMap::new();
    let mut terms = Vec::new();
    let add = |map: &mut BTreeMap<u32, ZSeries>, k: u32, s: ZSeries| {
        let e = map.entry(k).or_insert_with(|| ZSeries::zero(VarTag::X));
        *e = zsum(e, &s);
    };
    for k in 1..=3u32 {
        add(&mut q0, k, zmul(&pre[k as usize], &half_minus));
    }
    for k in 0..=3u32 {
        add(&mut q0, k + 1, zmul(&pre[k as usize], &dl[0]).neg());
        for (l, d) in dl.iter().enumerate().skip(1) {
            let mut c = zmul(&pre[k as usize], d).neg();
            if k == 0 && l == 3 {
                // The principal part: (3/2) x g₀³ = 1 goes to the symbol.
                c = zsum(&c, &zmono(Rational64::zero(), BigRational::from_integer((-1).into()), 0));
            }
            if c.is_zero() {
                continue;
            }
            terms.push(NonlinearTerm {
                equation: 0,
                k: MultiIndex(vec![k]),
                q: vec![DerivFactor { component: 0, j: MultiIndex(vec![l as u32]), power: 1 }],
                coeff: z_to_x(&c),
            });
        }
    }
    for (k, c) in q0 {
        if !c.is_zero() {
            terms.push(NonlinearTerm { equation: 0, k: MultiIndex(vec![k]), q: Vec::new(), coeff: z_to_x(&c) });
        }
    }
    terms.sort_by(|a, b| (a.q_key(), a.k.0.clone()).cmp(&(b.q_key(), b.k.0.clone())));
    Ok(PDEProblem {
        d: 1,
        n: 3,
        m: 1,
        symbol: SymbolPolynomial::minus_d_pow(3),
        terms,
        forcing: vec![forcing],
        initial: vec![XC::zero(VarTag::X)],
        epsilon: 1.0,
        sector: SectorSpec { phi: PI / 12.0, rho: 1.0, directions: vec![0.0], d: 1 },
        horizon: 0.1,
        ramification: vec![3],
        setting: Some(harry_dym_setting()),
        name: format!("harry-dym remainder N={n}"),
    })
}

/// Checks r = t^{-1} x^{ω₁} 𝔭(t x^{-3}, t x^{-2/3}) with lowest degree n' and
/// n' β_l - ω₁ ≥ 1; returns n'.
pub fn forcing_degree(problem: &PDEProblem, setting: &ScaledSetting) -> Result<usize> {
    let w1 = setting.omegas[0];
    let mut lo = usize::MAX;
    for m in problem.forcing[0].terms() {
        for (k, c) in m.coeff.c.iter().enumerate() {
            if c.norm() == 0.0 {
                continue;
            }
            // x^e t^k = t^{-1} x^{ω₁} x₁^a x₂^b, a + b = k + 1, e = ω₁ - 3a - (2/3)b.
            let deg = k as i64 + 1;
            let a = (w1 - m.exponent - rat(2, 3) * deg) * rat(3, 7);
            if !a.is_integer() || a < Rational64::zero() || a > Rational64::from_integer(deg) {
                return Err(BorelError::SettingRejected(format!("forcing monomial t^{k} x^{} off the lattice", m.exponent)));
            }
            lo = lo.min(deg as usize);
        }
    }
    let nd = Rational64::from_integer(lo as i64);
    if setting.betas.iter().any(|b| nd * *b - w1 < Rational64::one()) {
        return Err(BorelError::SettingRejected(format!("forcing degree {lo} too low for ω₁ = {w1}")));
    }
    Ok(lo)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeReport {
    /// t-exponents of H = Σ t^c G(ζ), ζ = z t^{-2/9}, observed in the series.
    pub exponents: Vec<String>,
    pub spacing: String,
    pub offset: String,
    /// All observed exponents are offset + k·spacing.
    pub on_lattice: bool,
    /// Sector of validity |arg z| < this.
    pub sector_z: f64,
}

/// Rewrites t^n z^e = t^{n + 2e/9} ζ^e and reads off the t-exponents.
pub fn observed_lattice(h: &[ZSeries]) -> LatticeReport {
    let mut ex: Vec<Rational64> = Vec::new();
    for (n, s) in h.iter().enumerate() {
        for m in s.terms() {
            let c = Rational64::from_integer(n as i64) + m.exponent * rat(2, 9);
            if !ex.contains(&c) {
                ex.push(c);
            }
        }
    }
    ex.sort();
    let spacing = rat(7, 9);
    let offset = ex[0];
    let on_lattice = ex.iter().all(|c| ((*c - offset) / spacing).is_integer());
    // x ∝ z^{3/2}: |arg x| < π/2 + π/6 maps to |arg z| < 4π/9.
    let sector_z = (PI / 2.0 + PI / 6.0) * 2.0 / 3.0;
    LatticeReport {
        exponents: ex.iter().map(|c| c.to_string()).collect(),
        spacing: spacing.to_string(),
        offset: offset.to_string(),
        on_lattice,
        sector_z,
    }
}

/// Coefficients of G_k(ζ) = Σ_a c_a ζ^{-1/2 - 9a/2 - k} read from H_{a+k}.
pub fn g_k_series(h: &[ZSeries], k: usize) -> Vec<(Rational64, f64)> {
    (0..h.len().saturating_sub(k))
        .filter_map(|a| {
            let e = rat(-1, 2) - rat(9, 2) * a as i64 - k as i64;
            h[a + k].terms().iter().find(|m| m.exponent == e).map(|m| (e, big_to_f64(&m.coeff.coeff(0))))
        })
        .collect()
}

pub fn eval_g_k(coeffs: &[(Rational64, f64)], zeta: f64) -> f64 {
    coeffs.iter().map(|(e, c)| c * zeta.powf(rat_to_f64(*e))).sum()
}

/// G₀ from G³G''' + G/9 + (2/9)ζG' = 0, integrated inward by RK4 from
/// ζ_far where the series supplies (G, G', G''). Returns (ζ, G) samples.
pub fn g0_ode(h: &[ZSeries], zeta_far: f64, zeta_min: f64, steps: usize) -> Vec<(f64, f64)> {
    let c = g_k_series(h, 0);
    let deriv = |d: u32, z: f64| -> f64 {
        c.iter()
            .map(|(e, v)| {
                let e = rat_to_f64(*e);
                let f = (0..d).fold(1.0, |acc, i| acc * (e - i as f64));
                v * f * z.powf(e - d as f64)
            })
            .sum()
    };
    let rhs = |z: f64, y: [f64; 3]| -> [f64; 3] { [y[1], y[2], -(y[0] / 9.0 + 2.0 / 9.0 * z * y[1]) / y[0].powi(3)] };
    let mut y = [deriv(0, zeta_far), deriv(1, zeta_far), deriv(2, zeta_far)];
    let hstep = -(zeta_far - zeta_min) / steps as f64;
    let mut z = zeta_far;
    let mut out = vec![(z, y[0])];
    for _ in 0..steps {
        let add = |a: [f64; 3], b: [f64; 3], s: f64| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]];
        let k1 = rhs(z, y);
        let k2 = rhs(z + hstep / 2.0, add(y, k1, hstep / 2.0));
        let k3 = rhs(z + hstep / 2.0, add(y, k2, hstep / 2.0));
        let k4 = rhs(z + hstep, add(y, k3, hstep));
        for i in 0..3 {
            y[i] += hstep / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        z += hstep;
        out.push((z, y[0]));
    }
    out.reverse();
    out
}

/// Sum of the t-exponent classes of the formal remainder x²Σ_{n>N} tⁿH_n at (x, t).
pub fn remainder_series(h: &[ZSeries], n: usize, x: f64, t: f64) -> f64 {
    let z = (1.5 * x).powf(2.0 / 3.0);
    let tail: f64 = h
        .iter()
        .enumerate()
        .skip(n + 1)
        .map(|(k, s)| t.powi(k as i32) * s.eval(Complex64::new(z, 0.0), 0.0).re)
        .sum();
    x * x * tail
}

#[derive(Debug, Clone, Serialize)]
pub struct HdSample {
    pub zeta: f64,
    pub x: f64,
    /// Remainder f from the scaled Borel solution.
    pub f_borel: f64,
    /// x²Σ_{N<n≤N'} tⁿH_n from the exact series.
    pub f_series: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HdScaledReport {
    pub n: usize,
    pub t: f64,
    pub lattice: LatticeReport,
    /// ω from the setting data (exponent differences over n).
    pub omega: Option<String>,
    pub alpha_table: Vec<(String, Vec<String>)>,
    pub m_qk: Vec<(String, String)>,
    pub solve: SolveReport,
    /// Smallest sampled ζ where the Laplace integral converged.
    pub rho: f64,
    pub samples: Vec<HdSample>,
    /// G₀ on [ρ, 4ρ] from its ODE.
    pub g0: Vec<(f64, f64)>,
    /// (k, ζ, G_k(ζ)) from the truncated series, k ≥ 1.
    pub g_k: Vec<(usize, f64, f64)>,
}

/// Scaled solve of the remainder equation at time t, compared on a ζ-grid
/// (x = ζ t^{1/3}) with the exact series, plus the G_k data.
pub fn harry_dym_scaled(n: usize, t: f64, config: &SolveConfig, zetas: &[f64]) -> Result<HdScaledReport> {
    let problem = harry_dym_problem(n)?;
    let setting = harry_dym_setting();
    let table = setting_alpha_table(&problem, &setting)?;
    let label = |q: &Vec<DerivFactor>| {
        if q.is_empty() {
            "q=0".to_string()
        } else {
            q.iter().map(|f| format!("e{}", f.j.abs())).collect::<Vec<_>>().join("+")
        }
    };
    let alpha_table = table.iter().map(|(q, a)| (label(q), a.iter().map(|v| v.to_string()).collect())).collect();
    let m_qk = m_qk(&problem, &setting)?.into_iter().map(|(l, m)| (l, m.to_string())).collect();
    let omega = lattice_omega(&problem, &setting)?.map(|w| w.to_string());
    let (state, solve) = scaled_solve(&problem, config, t)?;
    let h = harry_dym_h((3 * n).min(MAX_ORDER))?;
    let f = &state.values[0];
    let last = f.times.t[f.nt() - 1];
    let nh = rat_to_f64(state.n_hat);
    let mut samples = Vec::new();
    let mut rho = f64::INFINITY;
    for &zeta in zetas {
        let Ok(v) = laplace_ray_at(f, last, Complex64::new(zeta, 0.0)) else {
            continue;
        };
        rho = rho.min(zeta);
        let x = zeta * t.powf(1.0 / nh);
        samples.push(HdSample { zeta, x, f_borel: v.value.re * t.powf(-1.0 / nh), f_series: remainder_series(&h, n, x, t) });
    }
    if samples.is_empty() {
        return Err(BorelError::Domain("Laplace integral diverged at every sampled ζ".into()));
    }
    let far = (4.0 * rho + 10.0).max(30.0);
    let g0 = g0_ode(&h, far, rho, 40_000).into_iter().filter(|(z, _)| *z <= 4.0 * rho + 1e-9).step_by(500).collect();
    let mut g_k = Vec::new();
    for k in 1..=n {
        let c = g_k_series(&h, k);
        for i in 0..=8 {
            let z = rho * (1.0 + 3.0 * i as f64 / 8.0);
            g_k.push((k, z, eval_g_k(&c, z)));
        }
    }
    Ok(HdScaledReport { n, t, lattice: observed_lattice(&h), omega, alpha_table, m_qk, solve, rho, samples, g0, g_k })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h1_exact() {
        let h = harry_dym_h(1).unwrap();
        let want = zsum(&zmono(rat(-3, 2), brat(-1, 2), 0), &zmono(rat(-5, 1), brat(-15, 8), 0));
        assert_eq!(h[1], want);
    }

    #[test]
    fn structure_through_six() {
        let h = harry_dym_h(6).unwrap();
        for (n, s) in h.iter().enumerate() {
            assert!(structure_check(s, n).is_ok(), "H_{n}");
        }
    }

    #[test]
    fn residual_degrees() {
        for n in 1..=3 {
            let r = harry_dym_residual(n).unwrap();
            assert_eq!(r.lowest_degree, n + 1);
            assert!(r.highest_degree <= 4 * n + 1);
        }
    }

    #[test]
    fn x_form_matches_z_form() {
        // 𝒩 in x: H_t + H³/2 - (3x/2)H³H_xxx - (3/2)H³H_xx + H³H_x/(6x).
        let h = harry_dym_h(2).unwrap();
        let gx = z_to_x(&g_z(&h));
        let c = gx.pow(3);
        let d1 = gx.deriv();
        let d2 = d1.deriv();
        let d3x = d2.deriv();
        let one = |e: i64, v: f64| XC::monomial(VarTag::X, Rational64::from_integer(e), Complex64::new(v, 0.0)).unwrap();
        let lin = one(1, -1.5)
            .try_mul(&d3x)
            .unwrap()
            .try_add(&d2.scale(&Complex64::new(-1.5, 0.0)))
            .unwrap()
            .try_add(&one(-1, 1.0 / 6.0).try_mul(&d1).unwrap())
            .unwrap();
        let nx = gx.deriv_t().try_add(&c.scale(&Complex64::new(0.5, 0.0))).unwrap().try_add(&c.try_mul(&lin).unwrap()).unwrap();
        let nz = z_to_x(&operator_z(&g_z(&h)));
        for (x, t) in [(3.0, 0.1), (5.0, 0.4), (8.0, 1.0)] {
            let a = nx.eval(Complex64::new(x, 0.0), t);
            let b = nz.eval(Complex64::new(x, 0.0), t);
            assert!((a - b).norm() < 1e-12 * (1.0 + b.norm()), "{a} {b}");
        }
    }

    #[test]
    fn alpha_table_and_lattice() {
        let p = harry_dym_problem(3).unwrap();
        let s = harry_dym_setting();
        let table = setting_alpha_table(&p, &s).unwrap();
        let get = |l: Option<u32>| {
            let key = l.map(|l| vec![DerivFactor { component: 0, j: MultiIndex(vec![l]), power: 1 }]).unwrap_or_default();
            table[&key].clone()
        };
        assert_eq!(get(None), vec![rat(4, 3), rat(-1, 1)]);
        assert_eq!(get(Some(1)), vec![rat(2, 1)]);
        assert_eq!(get(Some(2)), vec![rat(1, 1)]);
        assert_eq!(get(Some(3)), vec![rat(0, 1)]);
        assert!(m_qk(&p, &s).unwrap().iter().all(|(_, m)| *m >= Rational64::zero()));
        assert_eq!(lattice_omega(&p, &s).unwrap(), Some(rat(7, 9)));
        assert_eq!(forcing_degree(&p, &s).unwrap(), 4);
    }

    #[test]
    fn lattice_and_sector() {
        let rep = observed_lattice(&harry_dym_h(4).unwrap());
        assert!(rep.on_lattice);
        assert_eq!(rep.offset, "-1/9");
        assert!((rep.sector_z - 4.0 * PI / 9.0).abs() < 1e-15);
    }

    #[test]
    fn g0_decays() {
        let h = harry_dym_h(4).unwrap();
        let s = g0_ode(&h, 30.0, 2.0, 60_000);
        let c = g_k_series(&h, 0);
        for &(z, g) in s.iter().step_by(5000) {
            assert!(g.is_finite() && g > 0.0);
            if z > 6.0 {
                assert!((g - eval_g_k(&c, z)).abs() < 1e-6, "{z} {g}");
            }
        }
        let (z, g) = *s.last().unwrap();
        assert!((g * z.sqrt() - 1.0).abs() < 1e-4);
    }
}

//! Borel-plane functions sampled on a ray p = s·e^{iθ}, their weighted norms,
//! and convolution by product integration.

use std::io::Write;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::cheb::ChebNodes;
use crate::error::{BorelError, Result};
use crate::quad::{gauss_jacobi_unit, gauss_legendre};
use crate::series::{rat_to_f64, RamifiedSeries, VarTag};

const STENCIL: usize = 6;
const JACOBI_NODES: usize = 24;
const PANEL_NODES: usize = 16;
const PANEL_WIDTH: f64 = 0.5;

/// sup_{s ≥ 0} 2(1+s²)(ln(1+s²) + s·atan s)/(s(s²+4)).
pub fn m0_constant() -> f64 {
    static M0: OnceLock<f64> = OnceLock::new();
    *M0.get_or_init(|| {
        let f = m0_integrand;
        // Coarse scan, then golden-section refinement around the best sample.
        let mut best = (0.0, 0.0);
        for i in 1..=4000 {
            let s = i as f64 * 0.005;
            let v = f(s);
            if v > best.1 {
                best = (s, v);
            }
        }
        let (mut a, mut b) = (best.0 - 0.005, best.0 + 0.005);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..200 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if f(c) > f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        f(0.5 * (a + b))
    })
}

pub fn m0_integrand(s: f64) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    let s2 = s * s;
    2.0 * (1.0 + s2) * ((1.0 + s2).ln() + s * s.atan()) / (s * (s2 + 4.0))
}

/// Radial nodes on one ray together with the small-p model F ≈ s^a·φ(s^{1/N}).
#[derive(Debug, Clone, PartialEq)]
pub struct RayGrid {
    pub theta: f64,
    pub nodes: Arc<Vec<f64>>,
    pub origin_exponent: Rational64,
    pub ramification: u32,
    u: Arc<Vec<f64>>,
}

impl RayGrid {
    pub fn new(theta: f64, nodes: Vec<f64>, origin_exponent: Rational64, ramification: u32) -> Result<Self> {
        if nodes.is_empty() {
            return Err(BorelError::EmptyGrid);
        }
        if nodes[0] <= 0.0 || nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(BorelError::GridMismatch("nodes must be positive and strictly increasing".into()));
        }
        if origin_exponent <= Rational64::from_integer(-1) {
            return Err(BorelError::NonIntegrable(rat_to_f64(origin_exponent)));
        }
        let n = ramification.max(1);
        let u = nodes.iter().map(|s| s.powf(1.0 / n as f64)).collect();
        Ok(Self { theta, nodes: Arc::new(nodes), origin_exponent, ramification: n, u: Arc::new(u) })
    }

    /// Geometric nodes from `s_min` to 1 (about m/3 of them), uniform up to `p_max`.
    pub fn standard(theta: f64, m: usize, p_max: f64, origin_exponent: Rational64, ramification: u32) -> Result<Self> {
        Self::new(theta, standard_nodes(m, p_max, 1e-8), origin_exponent, ramification)
    }

    /// Same nodes, different origin model.
    pub fn with_origin(&self, a: Rational64) -> Result<Self> {
        if a <= Rational64::from_integer(-1) {
            return Err(BorelError::NonIntegrable(rat_to_f64(a)));
        }
        let mut g = self.clone();
        g.origin_exponent = a;
        Ok(g)
    }

    pub fn with_ramification(&self, n: u32) -> Self {
        let n = n.max(1);
        let mut g = self.clone();
        g.ramification = n;
        g.u = Arc::new(self.nodes.iter().map(|s| s.powf(1.0 / n as f64)).collect());
        g
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn p_max(&self) -> f64 {
        *self.nodes.last().expect("non-empty grid")
    }
    pub fn a(&self) -> f64 {
        rat_to_f64(self.origin_exponent)
    }
    pub fn direction(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.theta)
    }
    pub fn point(&self, i: usize) -> Complex64 {
        self.direction() * self.nodes[i]
    }
    pub fn same_nodes(&self, o: &RayGrid) -> bool {
        Arc::ptr_eq(&self.nodes, &o.nodes) || self.nodes == o.nodes
    }

    /// Lagrange stencil in u = s^{1/N}: (first index, weights). Below the
    /// first node the model is extrapolated linearly in u.
    fn stencil(&self, s: f64) -> (usize, [f64; STENCIL], usize) {
        let u = self.u.as_slice();
        let m = u.len();
        let mut w = [0.0; STENCIL];
        let us = s.max(0.0).powf(1.0 / self.ramification as f64);
        if m == 1 {
            w[0] = 1.0;
            return (0, w, 1);
        }
        if us <= u[0] {
            let t = (us - u[0]) / (u[1] - u[0]);
            w[0] = 1.0 - t;
            w[1] = t;
            return (0, w, 2);
        }
        let width = STENCIL.min(m);
        let k = match u.binary_search_by(|v| v.total_cmp(&us)) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let start = k.saturating_sub(width / 2 - 1).min(m - width);
        for i in 0..width {
            let mut l = 1.0;
            for j in 0..width {
                if i != j {
                    l *= (us - u[start + j]) / (u[start + i] - u[start + j]);
                }
            }
            w[i] = l;
        }
        (start, w, width)
    }

    /// Node-spacing-based standard nodes shared by the solver.
    pub fn geometric_count(&self) -> usize {
        self.nodes.iter().take_while(|&&s| s < 1.0).count()
    }
}

pub fn standard_nodes(m: usize, p_max: f64, s_min: f64) -> Vec<f64> {
    let m = m.max(8);
    if p_max <= 1.0 {
        let r = (p_max / s_min).powf(1.0 / (m - 1) as f64);
        return (0..m).map(|i| if i == m - 1 { p_max } else { s_min * r.powi(i as i32) }).collect();
    }
    let mg = m / 3;
    let mu = m - mg;
    let r = (1.0 / s_min).powf(1.0 / mg as f64);
    let mut v: Vec<f64> = (0..mg).map(|i| s_min * r.powi(i as i32)).collect();
    let h = (p_max - 1.0) / (mu - 1) as f64;
    v.extend((0..mu).map(|i| if i == mu - 1 { p_max } else { 1.0 + h * i as f64 }));
    v
}

/// Samples F(s·e^{iθ}, t_k); values are stored node-major, (node, time).
#[derive(Debug, Clone, PartialEq)]
pub struct RayGridFunction {
    pub grid: RayGrid,
    pub times: ChebNodes,
    pub values: Vec<Complex64>,
}

impl RayGridFunction {
    pub fn zeros(grid: RayGrid, times: ChebNodes) -> Self {
        let n = grid.len() * times.len();
        Self { grid, times, values: vec![Complex64::zero(); n] }
    }

    /// Samples f(p, t) with p the complex point on the ray.
    pub fn from_fn(grid: RayGrid, times: ChebNodes, f: impl Fn(Complex64, f64) -> Complex64 + Sync) -> Self {
        let nt = times.len();
        let dir = grid.direction();
        let nodes = grid.nodes.clone();
        let values: Vec<Complex64> = (0..nodes.len() * nt)
            .into_par_iter()
            .map(|idx| f(dir * nodes[idx / nt], times.t[idx % nt]))
            .collect();
        Self { grid, times, values }
    }

    /// Samples a p-side series (exponents interpreted on this ray, principal branch).
    pub fn from_series(grid: RayGrid, times: ChebNodes, s: &RamifiedSeries<Complex64>) -> Result<Self> {
        if s.tag() != VarTag::P {
            return Err(BorelError::MixedTags);
        }
        let theta = grid.theta;
        let nt = times.len();
        let mut out = Self::zeros(grid, times);
        for i in 0..out.grid.len() {
            let r = out.grid.nodes[i];
            for k in 0..nt {
                out.values[i * nt + k] = s.eval_polar(r, theta, out.times.t[k]);
            }
        }
        Ok(out)
    }

    pub fn nt(&self) -> usize {
        self.times.len()
    }
    pub fn at(&self, i: usize, k: usize) -> Complex64 {
        self.values[i * self.nt() + k]
    }
    pub fn at_mut(&mut self, i: usize, k: usize) -> &mut Complex64 {
        let nt = self.nt();
        &mut self.values[i * nt + k]
    }

    /// Slice of values at the last time node.
    pub fn final_slice(&self) -> Vec<Complex64> {
        let k = self.nt() - 1;
        (0..self.grid.len()).map(|i| self.at(i, k)).collect()
    }

    fn compatible(&self, o: &Self) -> Result<()> {
        if (self.grid.theta - o.grid.theta).abs() > 1e-14 {
            return Err(BorelError::GridMismatch(format!("rays {} vs {}", self.grid.theta, o.grid.theta)));
        }
        if self.times != o.times {
            return Err(BorelError::GridMismatch("time nodes differ".into()));
        }
        Ok(())
    }

    /// Pointwise linear combination on identical nodes; the origin model is
    /// the smaller of the two exponents.
    pub fn axpy(&self, c: Complex64, o: &Self) -> Result<Self> {
        self.compatible(o)?;
        if !self.grid.same_nodes(&o.grid) {
            return Err(BorelError::GridMismatch("node sets differ".into()));
        }
        let mut out = self.clone();
        for (a, b) in out.values.iter_mut().zip(&o.values) {
            *a += c * b;
        }
        let a = self.grid.origin_exponent.min(o.grid.origin_exponent);
        let n = lcm(self.grid.ramification, o.grid.ramification);
        out.grid = self.grid.with_origin(a)?.with_ramification(n);
        Ok(out)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= c;
        }
        out
    }

    /// Multiplies by (-p)^j pointwise; the origin exponent rises by j.
    pub fn mul_minus_p_pow(&self, j: u32) -> Self {
        if j == 0 {
            return self.clone();
        }
        let mut out = self.clone();
        let nt = self.nt();
        for i in 0..self.grid.len() {
            let f = (-self.grid.point(i)).powu(j);
            for k in 0..nt {
                out.values[i * nt + k] *= f;
            }
        }
        out.grid = self.grid.with_origin(self.grid.origin_exponent + j as i64).expect("exponent increased");
        out
    }

    /// Pointwise |F|, for norm inequalities.
    pub fn abs(&self) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v = Complex64::new(v.norm(), 0.0);
        }
        out
    }

    /// φ = F / s^a at every sample.
    fn phi(&self) -> Vec<Complex64> {
        let a = self.grid.a();
        let nt = self.nt();
        let mut out = self.values.clone();
        for i in 0..self.grid.len() {
            let inv = self.grid.nodes[i].powf(-a);
            for k in 0..nt {
                out[i * nt + k] *= inv;
            }
        }
        out
    }

    /// Interpolated value at radial position s and time node k.
    pub fn eval(&self, s: f64, k: usize) -> Complex64 {
        let phi_at = |i: usize| self.at(i, k) * self.grid.nodes[i].powf(-self.grid.a());
        let (start, w, width) = self.grid.stencil(s);
        let mut acc = Complex64::zero();
        for j in 0..width {
            acc += phi_at(start + j) * w[j];
        }
        if s <= 0.0 {
            return if self.grid.a() == 0.0 { acc } else { Complex64::zero() };
        }
        acc * s.powf(self.grid.a())
    }

    /// Interpolated value at (s, τ) using Chebyshev interpolation in time.
    pub fn eval_st(&self, s: f64, tau: f64) -> Complex64 {
        let b = self.times.basis(tau);
        (0..self.nt()).map(|k| self.eval(s, k) * b[k]).sum()
    }

    /// Largest pointwise difference (absolute).
    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        self.values.iter().zip(&o.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> std::result::Result<(), (f64, f64)> {
        let nt = self.nt();
        for (idx, v) in self.values.iter().enumerate() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err((self.grid.nodes[idx / nt], self.times.t[idx % nt]));
            }
        }
        Ok(())
    }

    /// The first-node magnitude agrees with s^a scaling of the next decade
    /// within a factor 10 (the stored origin model is plausible).
    pub fn origin_consistent(&self) -> bool {
        let g = &self.grid;
        if g.len() < 2 {
            return true;
        }
        let j = g.nodes.iter().position(|&s| s >= 10.0 * g.nodes[0]).unwrap_or(g.len() - 1);
        let k = self.nt() - 1;
        let (f0, f1) = (self.at(0, k).norm(), self.at(j, k).norm());
        if f0 == 0.0 && f1 == 0.0 {
            return true;
        }
        let predicted = f1 * (g.nodes[0] / g.nodes[j]).powf(g.a());
        f0 <= 10.0 * predicted + 1e-300 && predicted <= 10.0 * f0 + 1e-300
    }

    /// CSV with columns ray_theta, p, t, re_F, im_F after a `#` metadata line.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut w = w;
        writeln!(
            w,
            "# nodes={} times={} t_max={} origin_exponent={} ramification={}",
            self.grid.len(),
            self.nt(),
            self.times.t_max,
            self.grid.origin_exponent,
            self.grid.ramification
        )
        .map_err(|e| BorelError::Domain(e.to_string()))?;
        let mut cw = csv::Writer::from_writer(w);
        cw.write_record(["ray_theta", "p", "t", "re_F", "im_F"]).map_err(|e| BorelError::Domain(e.to_string()))?;
        for i in 0..self.grid.len() {
            for k in 0..self.nt() {
                let v = self.at(i, k);
                cw.write_record(&[
                    format!("{:.17e}", self.grid.theta),
                    format!("{:.17e}", self.grid.nodes[i]),
                    format!("{:.17e}", self.times.t[k]),
                    format!("{:.17e}", v.re),
                    format!("{:.17e}", v.im),
                ])
                .map_err(|e| BorelError::Domain(e.to_string()))?;
            }
        }
        cw.flush().map_err(|e| BorelError::Domain(e.to_string()))?;
        Ok(())
    }
}

fn lcm(a: u32, b: u32) -> u32 {
    use num_integer::Integer;
    (a as u64).lcm(&(b as u64)) as u32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NormMode {
    Polynomial,
    ExponentialOrderN,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NuNormParams {
    pub nu: f64,
    pub mode: NormMode,
    pub n: u32,
    pub t_weight: bool,
}

impl NuNormParams {
    pub fn polynomial(nu: f64) -> Self {
        Self { nu, mode: NormMode::Polynomial, n: 1, t_weight: false }
    }
    pub fn exponential(nu: f64, n: u32) -> Self {
        Self { nu, mode: NormMode::ExponentialOrderN, n, t_weight: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormReport {
    pub value: f64,
    pub arg_p: f64,
    pub arg_t: f64,
    /// The weighted sup sits at the end of the grid and is still growing.
    pub divergent: bool,
}

fn sup_report(f: &RayGridFunction, weight: impl Fn(f64, f64) -> f64, prefactor: f64) -> Result<NormReport> {
    if f.grid.is_empty() || f.times.is_empty() {
        return Err(BorelError::EmptyGrid);
    }
    let nt = f.nt();
    let m = f.grid.len();
    let mut best = NormReport { value: 0.0, arg_p: 0.0, arg_t: 0.0, divergent: false };
    let mut best_i = usize::MAX;
    let a = f.grid.a();
    for k in 0..nt {
        let t = f.times.t[k];
        // The p = 0 value implied by the origin model.
        let v0 = if a > 0.0 {
            0.0
        } else if a == 0.0 {
            f.eval(0.0, k).norm()
        } else if f.at(0, k).norm() > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        let w0 = v0 * weight(0.0, t);
        if w0 > best.value {
            best = NormReport { value: w0, arg_p: 0.0, arg_t: t, divergent: w0.is_infinite() };
            best_i = usize::MAX;
        }
        for i in 0..m {
            let s = f.grid.nodes[i];
            let w = f.at(i, k).norm() * weight(s, t);
            if w > best.value {
                best = NormReport { value: w, arg_p: s, arg_t: t, divergent: false };
                best_i = i;
            }
        }
    }
    if best_i == m - 1 && m >= 2 {
        let k = f.times.t.iter().position(|&t| t == best.arg_t).unwrap_or(nt - 1);
        let prev = f.at(m - 2, k).norm() * weight(f.grid.nodes[m - 2], best.arg_t);
        if best.value > prev {
            best.divergent = true;
        }
    }
    best.value *= prefactor;
    Ok(best)
}

/// M₀ sup (1+|p|²) e^{-ν|p|} |F| over nodes, times and the extrapolated p = 0.
pub fn nu_norm(f: &RayGridFunction, params: &NuNormParams) -> Result<NormReport> {
    if params.mode != NormMode::Polynomial {
        return Err(BorelError::Domain("nu_norm needs polynomial mode".into()));
    }
    if params.nu <= 0.0 {
        return Err(BorelError::Domain("ν must be positive".into()));
    }
    let nu = params.nu;
    sup_report(f, |s, _| (1.0 + s * s) * (-nu * s).exp(), m0_constant())
}

/// sup |F| e^{-ν(t+1)(|p| + |p|^n)}; without `t_weight` the factor (t+1) is dropped.
pub fn exp_norm(f: &RayGridFunction, params: &NuNormParams) -> Result<NormReport> {
    if params.mode != NormMode::ExponentialOrderN {
        return Err(BorelError::Domain("exp_norm needs exponential mode".into()));
    }
    if params.nu <= 0.0 {
        return Err(BorelError::Domain("ν must be positive".into()));
    }
    let (nu, n, tw) = (params.nu, params.n as i32, params.t_weight);
    sup_report(f, |s, t| (-nu * if tw { t + 1.0 } else { 1.0 } * (s + s.powi(n))).exp(), 1.0)
}

/// One half of the split convolution: ∫₀^{p/2} f(σ) g(p-σ) dσ with f singular at 0.
#[allow(clippy::too_many_arguments)]
fn half_integral(
    fgrid: &RayGrid,
    fphi: &[Complex64],
    ggrid: &RayGrid,
    gphi: &[Complex64],
    nt: usize,
    p: f64,
    acc: &mut [Complex64],
) {
    let half = 0.5 * p;
    let af = fgrid.a();
    let ag = ggrid.a();
    let nf = fgrid.ramification as f64;
    let l1 = half.min(PANEL_WIDTH);
    let mut add_point = |sigma: f64, w: f64, with_sigma_power: bool| {
        let (fs, fw, fwid) = fgrid.stencil(sigma);
        let x = p - sigma;
        let (gs, gw, gwid) = ggrid.stencil(x);
        let mut wt = w * x.powf(ag);
        if with_sigma_power {
            wt *= sigma.powf(af);
        }
        for k in 0..nt {
            let mut fv = Complex64::zero();
            for j in 0..fwid {
                fv += fphi[(fs + j) * nt + k] * fw[j];
            }
            let mut gv = Complex64::zero();
            for j in 0..gwid {
                gv += gphi[(gs + j) * nt + k] * gw[j];
            }
            acc[k] += fv * gv * wt;
        }
    };
    // σ = L v^N on the first panel: weight v^{N(a+1)-1} handled by Gauss-Jacobi.
    let c = nf * (af + 1.0) - 1.0;
    let rule = gauss_jacobi_unit(JACOBI_NODES, c);
    let pref = nf * l1.powf(af + 1.0);
    for (v, w) in rule.nodes.iter().zip(&rule.weights) {
        add_point(l1 * v.powf(nf), pref * w, false);
    }
    if half > l1 {
        let panels = ((half - l1) / PANEL_WIDTH).ceil() as usize;
        let h = (half - l1) / panels as f64;
        let gl = gauss_legendre(PANEL_NODES);
        for pi in 0..panels {
            let a = l1 + h * pi as f64;
            for (x, w) in gl.nodes.iter().zip(&gl.weights) {
                add_point(a + 0.5 * h * (x + 1.0), 0.5 * h * w, true);
            }
        }
    }
}

/// (f*g)(p) = ∫₀^p f(s) g(p-s) ds along the ray, on f's nodes.
///
/// The integral is split at p/2 so each half has one singular endpoint,
/// modelled as s^a·φ(s^{1/N}) and integrated by Gauss-Jacobi; the rest uses
/// Gauss-Legendre panels on local Lagrange interpolants of φ.
pub fn convolve_grid(f: &RayGridFunction, g: &RayGridFunction) -> Result<RayGridFunction> {
    f.compatible(g)?;
    for a in [f.grid.a(), g.grid.a()] {
        if a <= -1.0 {
            return Err(BorelError::NonIntegrable(a));
        }
    }
    if g.grid.p_max() < f.grid.p_max() * (1.0 - 1e-12) {
        return Err(BorelError::GridMismatch("second factor does not cover the first factor's range".into()));
    }
    let nt = f.nt();
    let fphi = f.phi();
    let gphi = g.phi();
    let dir = f.grid.direction();
    let nodes = f.grid.nodes.clone();
    let rows: Vec<Vec<Complex64>> = nodes
        .par_iter()
        .map(|&p| {
            let mut acc = vec![Complex64::zero(); nt];
            half_integral(&f.grid, &fphi, &g.grid, &gphi, nt, p, &mut acc);
            half_integral(&g.grid, &gphi, &f.grid, &fphi, nt, p, &mut acc);
            for v in &mut acc {
                *v *= dir;
            }
            acc
        })
        .collect();
    let a = f.grid.origin_exponent + g.grid.origin_exponent + 1;
    let n = lcm(f.grid.ramification, g.grid.ramification);
    let grid = f.grid.with_origin(a)?.with_ramification(n);
    Ok(RayGridFunction { grid, times: f.times.clone(), values: rows.into_iter().flatten().collect() })
}

/// Convolution with a known p-side series, grouped by exponent class mod 1 so
/// each group is s^a times a function analytic in s^{1/N}.
pub fn convolve_series_grid(b: &RamifiedSeries<Complex64>, f: &RayGridFunction, time_map: impl Fn(f64) -> f64) -> Result<RayGridFunction> {
    if b.tag() != VarTag::P {
        return Err(BorelError::MixedTags);
    }
    let mut out: Option<RayGridFunction> = None;
    let theta = f.grid.theta;
    // Group by fractional part of the exponent.
    let mut groups: std::collections::BTreeMap<Rational64, Vec<usize>> = std::collections::BTreeMap::new();
    for (i, m) in b.terms().iter().enumerate() {
        let e = m.exponent;
        let frac = e - e.floor();
        groups.entry(frac).or_default().push(i);
    }
    for idx in groups.values() {
        let amin = idx.iter().map(|&i| b.terms()[i].exponent).min().expect("non-empty group");
        let grid = f.grid.with_origin(amin)?.with_ramification(b.ramification().max(1) * f.grid.ramification);
        let nt = f.nt();
        let mut bg = RayGridFunction::zeros(grid, f.times.clone());
        for i in 0..bg.grid.len() {
            let r = bg.grid.nodes[i];
            for k in 0..nt {
                let t = time_map(f.times.t[k]);
                let mut v = Complex64::zero();
                for &j in idx {
                    let m = &b.terms()[j];
                    let e = rat_to_f64(m.exponent);
                    v += m.coeff.eval(t) * Complex64::from_polar(r.powf(e), e * theta);
                }
                bg.values[i * nt + k] = v;
            }
        }
        let c = convolve_grid(&bg, f)?;
        out = Some(match out {
            None => c,
            Some(o) => {
                let a = o.grid.origin_exponent.min(c.grid.origin_exponent);
                let n = lcm(o.grid.ramification, c.grid.ramification);
                let mut s = o.clone();
                for (x, y) in s.values.iter_mut().zip(&c.values) {
                    *x += y;
                }
                s.grid = o.grid.with_origin(a)?.with_ramification(n);
                s
            }
        });
    }
    Ok(out.unwrap_or_else(|| {
        let mut z = RayGridFunction::zeros(f.grid.clone(), f.times.clone());
        z.grid = f.grid.with_origin(f.grid.origin_exponent + 1).expect("raised exponent");
        z
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn m0_value_and_limits() {
        let m0 = m0_constant();
        assert!((3.75..=3.77).contains(&m0), "{m0}");
        assert!(m0_integrand(1e-8) < 1e-6);
        assert!((m0_integrand(1e6) - PI).abs() < 1e-4);
    }

    #[test]
    fn convolution_of_ones_is_linear() {
        let g = RayGrid::standard(0.0, 256, 4.0, r(0, 1), 1).unwrap();
        let one = RayGridFunction::from_fn(g, ChebNodes::new(0, 1.0), |_, _| Complex64::new(1.0, 0.0));
        let c = convolve_grid(&one, &one).unwrap();
        for i in 0..c.grid.len() {
            assert!((c.at(i, 0).re - c.grid.nodes[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn half_powers() {
        let g = RayGrid::standard(0.0, 2048, 4.0, r(1, 2), 1).unwrap();
        let f = RayGridFunction::from_fn(g, ChebNodes::new(0, 1.0), |p, _| p.sqrt());
        let c = convolve_grid(&f, &f).unwrap();
        let v = c.eval(1.0, 0).re;
        assert!((v / (PI / 8.0) - 1.0).abs() < 1e-6, "{v}");
        let g = RayGrid::standard(0.0, 512, 4.0, r(-1, 2), 2).unwrap();
        let f = RayGridFunction::from_fn(g, ChebNodes::new(0, 1.0), |p, _| 1.0 / p.sqrt());
        let c = convolve_grid(&f, &f).unwrap();
        let v = c.eval(1.0, 0).re;
        assert!((v - PI).abs() < 1e-9, "{v}");
    }

    #[test]
    fn norms_examples() {
        let g = RayGrid::standard(0.0, 400, 8.0, r(0, 1), 1).unwrap();
        let one = RayGridFunction::from_fn(g.clone(), ChebNodes::new(4, 1.0), |_, _| Complex64::new(1.0, 0.0));
        for nu in [1.0, 2.0, 5.0] {
            let n = nu_norm(&one, &NuNormParams::polynomial(nu)).unwrap();
            assert!((n.value - m0_constant()).abs() < 1e-12);
            assert_eq!(n.arg_p, 0.0);
        }
        let zero = RayGridFunction::zeros(g.clone(), ChebNodes::new(4, 1.0));
        assert_eq!(nu_norm(&zero, &NuNormParams::polynomial(3.0)).unwrap().value, 0.0);
        let e = RayGridFunction::from_fn(g.clone(), ChebNodes::new(4, 1.0), |p, _| (3.0 * p).exp());
        assert!(nu_norm(&e, &NuNormParams::polynomial(3.0)).unwrap().divergent);
        let en = exp_norm(&one, &NuNormParams::exponential(2.0, 3)).unwrap();
        assert!((en.value - 1.0).abs() < 1e-15);
        // e^{2p³} overflows past p ≈ 7; keep the grid short.
        let short = RayGrid::standard(0.0, 200, 5.0, r(0, 1), 1).unwrap();
        let big = RayGridFunction::from_fn(short, ChebNodes::new(0, 0.0), |p, _| (2.0 * p.powu(3)).exp());
        let mut params = NuNormParams::exponential(2.0, 3);
        params.t_weight = true;
        let rep = exp_norm(&big, &params).unwrap();
        assert!((rep.value - 1.0).abs() < 1e-12, "{rep:?}");
    }

    #[test]
    fn tilted_ray_convolution() {
        let theta = 0.3;
        let g = RayGrid::standard(theta, 512, 4.0, r(0, 1), 1).unwrap();
        let f = RayGridFunction::from_fn(g, ChebNodes::new(0, 1.0), |p, _| p);
        let c = convolve_grid(&f, &f).unwrap();
        // p * p = p³/6
        let s = 2.0;
        let want = (Complex64::from_polar(s, theta)).powu(3) / 6.0;
        assert!((c.eval(s, 0) - want).norm() < 1e-10);
    }
}

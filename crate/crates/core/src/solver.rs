//! Picard iteration for the Borel-plane integral equation
//! F = F₀ + ∫₀ᵗ e^{-P(-p)(t-τ)} Σ' B_{q,k} * F^{*k} * Π((-p)^j F_l)^{*q_{l,j}} dτ
//! and its small-time rescaled form.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::cheb::ChebNodes;
use crate::error::{BorelError, Result};
use crate::grid::{convolve_grid, convolve_series_grid, nu_norm, NuNormParams, RayGrid, RayGridFunction};
use crate::problem::{check_cone_condition, validate_constraint, PDEProblem, ScaledSetting};
use crate::quad::gauss_legendre;
use crate::series::{rat_to_f64, RamifiedMonomial, RamifiedSeries, TPoly, VarTag};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveConfig {
    /// Norm weight; `None` selects it with [`estimate_contraction`].
    pub nu: Option<f64>,
    pub max_iters: usize,
    pub tol: f64,
    pub ball_factor: f64,
    /// Gauss-Legendre order per panel of the Duhamel weights.
    pub time_quad_order: usize,
    pub epsilon_guard: bool,
    pub nodes: usize,
    pub p_max: f64,
    /// Chebyshev degree in time (K+1 nodes).
    pub time_nodes: usize,
    pub theta: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            nu: None,
            max_iters: 60,
            tol: 1e-11,
            ball_factor: 2.0,
            time_quad_order: 32,
            epsilon_guard: true,
            nodes: 1024,
            p_max: 8.0,
            time_nodes: 16,
            theta: 0.0,
        }
    }
}

impl SolveConfig {
    /// Sets one field from its textual form, as used by `[solve]` blocks and `--set`.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = || BorelError::Domain(format!("bad value {value:?} for solve option {key}"));
        let f = || value.trim().parse::<f64>().map_err(|_| bad());
        let u = || value.trim().parse::<usize>().map_err(|_| bad());
        match key {
            "nu" => self.nu = if value.trim() == "auto" { None } else { Some(f()?) },
            "max_iters" => self.max_iters = u()?,
            "tol" => self.tol = f()?,
            "ball_factor" => self.ball_factor = f()?,
            "time_quad_order" => self.time_quad_order = u()?,
            "epsilon_guard" => self.epsilon_guard = value.trim().parse().map_err(|_| bad())?,
            "nodes" => self.nodes = u()?,
            "p_max" => self.p_max = f()?,
            "time_nodes" => self.time_nodes = u()?,
            "theta" => self.theta = f()?,
            _ => return Err(BorelError::Domain(format!("unknown solve option {key}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !(self.ball_factor > 1.0) || self.max_iters == 0 || self.nodes < 16 {
            return Err(BorelError::Domain("invalid solve configuration".into()));
        }
        if let Some(nu) = self.nu {
            if !(nu > 0.0) {
                return Err(BorelError::Domain("ν must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionEstimate {
    pub nu: f64,
    pub f0_norm: f64,
    pub ball_ok: bool,
    pub contract_ok: bool,
    /// (1 - 1/b) minus the ball sum.
    pub ball_margin: f64,
    /// 1 minus the contraction sum.
    pub contract_margin: f64,
    /// The contraction sum itself: a Lipschitz bound for the Picard map.
    pub lipschitz: f64,
    /// Σ D β (b‖F₀‖)^m ≤ (b-1)‖F₀‖, the ball property without normalization.
    pub ball_ok_strict: bool,
    pub per_term: Vec<TermConstants>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermConstants {
    pub term: String,
    /// sup_p |p|^{Σ j q} ∫₀ᵀ |e^{-P(-p)u}| du
    pub duhamel: f64,
    /// Operator norm bound of G ↦ B * G in the ν-norm.
    pub beta: f64,
    pub degree: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub iters: usize,
    pub norms: Vec<f64>,
    pub diffs: Vec<f64>,
    pub contraction_ratios: Vec<f64>,
    pub ball_ok: bool,
    pub contract_ok: bool,
    pub converged: bool,
    pub residual: f64,
    pub nu: f64,
    pub estimate: Option<ContractionEstimate>,
    pub dropped_terms: usize,
    pub warnings: Vec<String>,
}

/// Borel-plane coefficient: δ part b₀(t)·δ(p) plus a p-side series.
#[derive(Debug, Clone)]
struct BorelCoeff {
    delta: TPoly<Complex64>,
    series: RamifiedSeries<Complex64>,
}

impl BorelCoeff {
    fn from_x_series(b: &RamifiedSeries<Complex64>) -> Result<Self> {
        let mut delta = TPoly::zero();
        let mut rest = Vec::new();
        for m in b.terms() {
            if m.exponent.is_zero() {
                delta = &delta + &m.coeff;
            } else if m.exponent > Rational64::zero() {
                return Err(BorelError::Unsupported(format!(
                    "coefficient grows like x^{}; use the rescaled small-time setting",
                    m.exponent
                )));
            } else {
                rest.push(m.clone());
            }
        }
        let series = RamifiedSeries::from_terms(VarTag::X, rest)?.borel()?;
        Ok(Self { delta, series })
    }
}

#[derive(Debug, Clone)]
struct SysTerm {
    label: String,
    equation: usize,
    k: Vec<u32>,
    q: Vec<(usize, u32, u32)>,
    coeff: BorelCoeff,
    prefactor: f64,
}

impl SysTerm {
    fn degree(&self) -> u32 {
        self.k.iter().sum::<u32>() + self.q.iter().map(|f| f.2).sum::<u32>()
    }
    fn weight(&self) -> u32 {
        self.q.iter().map(|f| f.1 * f.2).sum()
    }
}

/// Per-node Duhamel weights W_i[k][j] = ∫₀^{t_k} e^{-a_i u} ℓ_j(t_k - u) du.
#[derive(Debug, Clone)]
pub struct Duhamel {
    nt: usize,
    weights: Vec<Complex64>,
    decay: Vec<Complex64>,
}

impl Duhamel {
    pub fn new(a: &[Complex64], times: &ChebNodes, order: usize) -> Self {
        let nt = times.len();
        let gl = gauss_legendre(order.max(4));
        let rows: Vec<(Vec<Complex64>, Vec<Complex64>)> = a
            .par_iter()
            .map(|&ai| {
                let mut w = vec![Complex64::zero(); nt * nt];
                let mut dec = vec![Complex64::zero(); nt];
                for k in 0..nt {
                    let tk = times.t[k];
                    dec[k] = (-ai * tk).exp();
                    if tk == 0.0 {
                        continue;
                    }
                    let mut u_end = tk;
                    if ai.re > 0.0 {
                        u_end = u_end.min(40.0 / ai.re);
                    }
                    let panels = ((ai.norm() * u_end / 8.0).ceil() as usize).clamp(1, 256);
                    let h = u_end / panels as f64;
                    for p in 0..panels {
                        let a0 = h * p as f64;
                        for (x, gw) in gl.nodes.iter().zip(&gl.weights) {
                            let u = a0 + 0.5 * h * (x + 1.0);
                            let e = (-ai * u).exp() * (0.5 * h * gw);
                            let b = times.basis(tk - u);
                            for j in 0..nt {
                                w[k * nt + j] += e * b[j];
                            }
                        }
                    }
                }
                (w, dec)
            })
            .collect();
        let mut weights = Vec::with_capacity(a.len() * nt * nt);
        let mut decay = Vec::with_capacity(a.len() * nt);
        for (w, d) in rows {
            weights.extend(w);
            decay.extend(d);
        }
        Self { nt, weights, decay }
    }

    /// out(i, k) = Σ_j W_i[k][j] rhs(i, j), added into `out`.
    fn apply_into(&self, rhs: &[Complex64], out: &mut [Complex64]) {
        let nt = self.nt;
        out.par_chunks_mut(nt).enumerate().for_each(|(i, row)| {
            let w = &self.weights[i * nt * nt..(i + 1) * nt * nt];
            let r = &rhs[i * nt..(i + 1) * nt];
            for k in 0..nt {
                let mut acc = Complex64::zero();
                for j in 0..nt {
                    acc += w[k * nt + j] * r[j];
                }
                row[k] += acc;
            }
        });
    }

    fn decay_at(&self, i: usize, k: usize) -> Complex64 {
        self.decay[i * self.nt + k]
    }
}

/// A discretized integral equation on one ray: everything the Picard map needs.
#[derive(Debug, Clone)]
pub struct PicardOperator {
    pub grid: RayGrid,
    pub times: ChebNodes,
    pub f0: Vec<RayGridFunction>,
    terms: Vec<SysTerm>,
    duhamel: Vec<Duhamel>,
    symbol_vals: Vec<Vec<Complex64>>,
    /// Horizon of the "time" variable (T, or 1 for λ).
    horizon: f64,
    drop_tol: f64,
}

fn lcm_all(it: impl IntoIterator<Item = u32>) -> u32 {
    it.into_iter().fold(1u32, |a, b| (a as u64).lcm(&(b.max(1) as u64)) as u32)
}

/// Borel data of forcing and initial condition per component.
fn borel_data(problem: &PDEProblem) -> Result<(Vec<RamifiedSeries<Complex64>>, Vec<RamifiedSeries<Complex64>>)> {
    let mut r = Vec::new();
    let mut fi = Vec::new();
    for l in 0..problem.m {
        let zero = RamifiedSeries::zero(VarTag::X);
        let rf = problem.forcing.get(l).unwrap_or(&zero);
        let ii = problem.initial.get(l).unwrap_or(&zero);
        r.push(rf.borel()?);
        fi.push(ii.borel()?);
    }
    Ok((r, fi))
}

fn origin_of(series: &[&RamifiedSeries<Complex64>]) -> Rational64 {
    series.iter().filter_map(|s| s.min_exponent()).min().unwrap_or_else(Rational64::zero)
}

impl PicardOperator {
    /// Unscaled equation on the ray `config.theta` over t ∈ [0, T].
    pub fn new(problem: &PDEProblem, config: &SolveConfig) -> Result<Self> {
        config.validate()?;
        if problem.d != 1 {
            return Err(BorelError::Unsupported(format!(
                "the grid solver handles d = 1 only (problem has d = {})",
                problem.d
            )));
        }
        let cone = check_cone_condition(&problem.symbol, problem.sector.phi, 512)?;
        if !cone.ok {
            return Err(BorelError::ConeNotVerified);
        }
        let (r, fi) = borel_data(problem)?;
        let mut terms = Vec::new();
        for t in &problem.terms {
            terms.push(SysTerm {
                label: t.label(),
                equation: t.equation,
                k: t.k.0.clone(),
                q: t.q.iter().map(|f| (f.component, f.j.abs(), f.power)).collect(),
                coeff: BorelCoeff::from_x_series(&t.coeff)?,
                prefactor: 1.0,
            });
        }
        let refs: Vec<&RamifiedSeries<Complex64>> = r.iter().chain(&fi).collect();
        let a = origin_of(&refs);
        let n = lcm_all(
            problem
                .ramification
                .iter()
                .copied()
                .chain(refs.iter().map(|s| s.ramification()))
                .chain(terms.iter().map(|t| t.coeff.series.ramification())),
        );
        let grid = RayGrid::standard(config.theta, config.nodes, config.p_max, a, n)?;
        let times = ChebNodes::new(config.time_nodes, problem.horizon);
        let symbol_vals: Vec<Vec<Complex64>> = (0..problem.m)
            .map(|l| (0..grid.len()).map(|i| problem.symbol.at_minus_p_1d(l, grid.point(i))).collect())
            .collect();
        let duhamel: Vec<Duhamel> =
            symbol_vals.iter().map(|a| Duhamel::new(a, &times, config.time_quad_order)).collect();
        let mut op = Self {
            grid,
            times,
            f0: Vec::new(),
            terms,
            duhamel,
            symbol_vals,
            horizon: problem.horizon,
            drop_tol: config.tol / 100.0,
        };
        op.f0 = (0..problem.m)
            .map(|l| op.build_f0_component(&fi[l], &r[l], |t| t, 1.0))
            .collect::<Result<Vec<_>>>()?;
        Ok(op)
    }

    /// F₀ = e^{-a t} F_I + Duhamel[scale·R(time_map(t))].
    fn build_f0_component(
        &self,
        fi: &RamifiedSeries<Complex64>,
        r: &RamifiedSeries<Complex64>,
        time_map: impl Fn(f64) -> f64,
        r_scale: f64,
    ) -> Result<RayGridFunction> {
        let nt = self.times.len();
        let l = self.f0.len();
        let mut out = RayGridFunction::zeros(self.grid.clone(), self.times.clone());
        let mut rhs = vec![Complex64::zero(); self.grid.len() * nt];
        for i in 0..self.grid.len() {
            let s = self.grid.nodes[i];
            let fiv = fi.eval_polar(s, self.grid.theta, 0.0);
            for k in 0..nt {
                out.values[i * nt + k] = self.duhamel[l].decay_at(i, k) * fiv;
                rhs[i * nt + k] = r.eval_polar(s, self.grid.theta, time_map(self.times.t[k])) * r_scale;
            }
        }
        self.duhamel[l].apply_into(&rhs, &mut out.values);
        Ok(out)
    }

    pub fn m(&self) -> usize {
        self.f0.len()
    }

    /// Right-hand side of one term, before the Duhamel integral.
    fn term_rhs(&self, term: &SysTerm, f: &[RayGridFunction]) -> Result<RayGridFunction> {
        let mut g: Option<RayGridFunction> = None;
        let mut push = |h: &RayGridFunction| -> Result<()> {
            g = Some(match g.take() {
                None => h.clone(),
                Some(acc) => convolve_grid(&acc, h)?,
            });
            Ok(())
        };
        for (l, &kl) in term.k.iter().enumerate() {
            for _ in 0..kl {
                push(&f[l])?;
            }
        }
        for &(l, j, pow) in &term.q {
            let h = f[l].mul_minus_p_pow(j);
            for _ in 0..pow {
                push(&h)?;
            }
        }
        let g = g.ok_or_else(|| BorelError::InvalidProblem(format!("{}: b_(0,0) term", term.label)))?;
        let mut out = if term.coeff.series.is_zero() {
            None
        } else {
            Some(convolve_series_grid(&term.coeff.series, &g, |t| t)?)
        };
        if !term.coeff.delta.is_zero() {
            let nt = g.nt();
            let mut d = g.clone();
            for i in 0..g.grid.len() {
                for k in 0..nt {
                    d.values[i * nt + k] *= term.coeff.delta.eval(self.times.t[k]);
                }
            }
            out = Some(match out {
                None => d,
                Some(o) => {
                    let mut s = o.clone();
                    for (x, y) in s.values.iter_mut().zip(&d.values) {
                        *x += y;
                    }
                    s.grid = o.grid.with_origin(o.grid.origin_exponent.min(d.grid.origin_exponent))?;
                    s
                }
            });
        }
        let mut out = out.expect("term has a coefficient");
        if term.prefactor != 1.0 {
            out = out.scale(Complex64::new(term.prefactor, 0.0));
        }
        Ok(out)
    }

    /// Nonlinear map 𝒩(F); terms whose tail bound is below tol/100 are dropped.
    pub fn step(&self, f: &[RayGridFunction], nu: f64) -> Result<(Vec<RayGridFunction>, usize)> {
        let norms: Vec<f64> = f
            .iter()
            .map(|x| nu_norm(x, &NuNormParams::polynomial(nu)).map(|r| r.value))
            .collect::<Result<_>>()?;
        let fmax = norms.iter().cloned().fold(0.0, f64::max);
        let mut out: Vec<RayGridFunction> = self.f0.clone();
        let mut rhs: Vec<Vec<Complex64>> = vec![vec![Complex64::zero(); self.f0[0].values.len()]; self.m()];
        let mut dropped = 0;
        for term in &self.terms {
            if term.degree() >= 2 && fmax.powi(term.degree() as i32) * self.term_scale(term) < self.drop_tol {
                dropped += 1;
                continue;
            }
            let r = self.term_rhs(term, f)?;
            if let Err((p, t)) = r.is_finite() {
                return Err(BorelError::Diverged { p, t });
            }
            for (a, b) in rhs[term.equation].iter_mut().zip(&r.values) {
                *a += b;
            }
        }
        for l in 0..self.m() {
            self.duhamel[l].apply_into(&rhs[l], &mut out[l].values);
            if let Err((p, t)) = out[l].is_finite() {
                return Err(BorelError::Diverged { p, t });
            }
        }
        Ok((out, dropped))
    }

    /// Crude magnitude of a term's coefficient, for the truncation rule.
    fn term_scale(&self, term: &SysTerm) -> f64 {
        let t = self.horizon;
        let mut s: f64 = term.coeff.delta.c.iter().map(|c| c.norm()).sum::<f64>() * (1.0 + t).powi(term.coeff.delta.c.len() as i32);
        for m in term.coeff.series.terms() {
            let e = rat_to_f64(m.exponent);
            let deg = m.coeff.c.len() as i32;
            s += m.coeff.c.iter().map(|c| c.norm()).sum::<f64>()
                * (1.0 + t).powi(deg)
                * (1.0 + self.grid.p_max()).powf(e.max(0.0));
        }
        s * term.prefactor.abs() * (1.0 + self.grid.p_max()).powi(term.weight() as i32) * t.max(1.0)
    }

    fn norm_all(f: &[RayGridFunction], nu: f64) -> Result<f64> {
        let mut m = 0.0f64;
        for x in f {
            m = m.max(nu_norm(x, &NuNormParams::polynomial(nu))?.value);
        }
        Ok(m)
    }

    fn diff_norm(a: &[RayGridFunction], b: &[RayGridFunction], nu: f64) -> Result<f64> {
        let mut m = 0.0f64;
        for (x, y) in a.iter().zip(b) {
            let d = x.axpy(Complex64::new(-1.0, 0.0), y)?;
            m = m.max(nu_norm(&d, &NuNormParams::polynomial(nu))?.value);
        }
        Ok(m)
    }

    /// Measured constants of the ball and contraction sums.
    pub fn estimate(&self, nu: f64, b: f64) -> Result<ContractionEstimate> {
        let f0n = Self::norm_all(&self.f0, nu)?;
        let mut per_term = Vec::new();
        let (mut s1, mut s2) = (0.0, 0.0);
        for term in &self.terms {
            let w = term.weight();
            let d = duhamel_constant(&self.symbol_vals[term.equation], &self.grid, w, self.horizon);
            let beta = self.beta_constant(term, nu);
            let m = term.degree();
            s1 += d * beta * (b * f0n).powi(m as i32);
            s2 += m as f64 * d * beta * (3.0 * b * f0n).powi(m as i32 - 1);
            per_term.push(TermConstants { term: term.label.clone(), duhamel: d, beta, degree: m });
        }
        let ball_ok = b * f0n < 1.0 && s1 < 1.0 - 1.0 / b;
        Ok(ContractionEstimate {
            nu,
            f0_norm: f0n,
            ball_ok,
            contract_ok: s2 < 1.0,
            ball_margin: (1.0 - 1.0 / b) - s1,
            contract_margin: 1.0 - s2,
            lipschitz: s2,
            ball_ok_strict: s1 <= (b - 1.0) * f0n || self.terms.is_empty(),
            per_term,
        })
    }

    /// sup over p and times of ∫₀^p |B(s)| e^{-νs} (1+p²)/(1+(p-s)²) ds, plus |b₀|.
    fn beta_constant(&self, term: &SysTerm, nu: f64) -> f64 {
        let mut best = 0.0f64;
        let theta = self.grid.theta;
        let series = &term.coeff.series;
        let amin = series.min_exponent().map(rat_to_f64).unwrap_or(0.0);
        let kappa = 1.0 / (amin + 1.0);
        let gl = gauss_legendre(48);
        let ps: Vec<f64> = (0..=120).map(|i| 1e-3 * (self.grid.p_max() * 4e3).powf(i as f64 / 120.0)).collect();
        for &t in &[0.0, 0.5 * self.horizon, self.horizon] {
            let mut sup = 0.0f64;
            if !series.is_zero() {
                for &p in &ps {
                    // s = p w^κ removes the endpoint singularity; panels in w.
                    let mut acc = 0.0;
                    let panels = 8;
                    for pi in 0..panels {
                        let (a, c) = (pi as f64 / panels as f64, (pi + 1) as f64 / panels as f64);
                        for (x, gw) in gl.nodes.iter().zip(&gl.weights) {
                            let wv = a + 0.5 * (c - a) * (x + 1.0);
                            let s = p * wv.powf(kappa);
                            let jac = p * kappa * wv.powf(kappa - 1.0);
                            let bv = series.eval_polar(s, theta, t).norm();
                            acc += 0.5 * (c - a) * gw * jac * bv * (-nu * s).exp() * (1.0 + p * p) / (1.0 + (p - s) * (p - s));
                        }
                    }
                    sup = sup.max(acc);
                }
            }
            best = best.max(sup + term.coeff.delta.eval(t).norm());
        }
        best * term.prefactor.abs()
    }
}

/// sup_p |p|^w ∫₀ᵀ |e^{-a(p) u}| du over the grid and beyond it.
fn duhamel_constant(symbol_vals: &[Complex64], grid: &RayGrid, w: u32, horizon: f64) -> f64 {
    let mut best = 0.0f64;
    let mut consider = |s: f64, a: Complex64| {
        let re = a.re;
        let integral = if re.abs() * horizon < 1e-12 {
            horizon
        } else {
            (1.0 - (-re * horizon).exp()) / re
        };
        best = best.max(s.powi(w as i32) * integral);
    };
    for (i, &a) in symbol_vals.iter().enumerate() {
        consider(grid.nodes[i], a);
    }
    // Beyond p_max the symbol is dominated by its principal part; extrapolate
    // with the last value's growth rate.
    let (s_last, a_last) = (grid.p_max(), *symbol_vals.last().expect("non-empty"));
    for k in 1..=40 {
        let s = s_last * 1.25f64.powi(k);
        let n = (a_last.norm().ln() / s_last.ln()).max(1.0);
        consider(s, a_last * (s / s_last).powf(n));
    }
    best
}

/// Builds F₀ for the problem on the configured ray.
pub fn build_f0(problem: &PDEProblem, config: &SolveConfig) -> Result<Vec<RayGridFunction>> {
    Ok(PicardOperator::new(problem, config)?.f0)
}

/// One application of 𝒩 (rebuilds the operator; use [`PicardOperator`] in loops).
pub fn picard_step(f: &[RayGridFunction], problem: &PDEProblem, config: &SolveConfig) -> Result<Vec<RayGridFunction>> {
    let op = PicardOperator::new(problem, config)?;
    let nu = config.nu.unwrap_or(10.0);
    Ok(op.step(f, nu)?.0)
}

/// Evaluates the ball and contraction conditions at weight ν.
pub fn estimate_contraction(problem: &PDEProblem, nu: f64, config: &SolveConfig) -> Result<ContractionEstimate> {
    PicardOperator::new(problem, config)?.estimate(nu, config.ball_factor)
}

/// Doubles ν from 4ρ₀ + α_r + 4 until both conditions hold (or gives up at 2¹⁴ times the start).
pub fn select_nu(op: &PicardOperator, rho0: f64, alpha_r: f64, b: f64) -> Result<ContractionEstimate> {
    let mut nu = 4.0 * rho0 + alpha_r + 4.0;
    let mut last = op.estimate(nu, b)?;
    for _ in 0..14 {
        if last.ball_ok && last.contract_ok {
            return Ok(last);
        }
        nu *= 2.0;
        last = op.estimate(nu, b)?;
    }
    Ok(last)
}

/// Iterates the Picard map of `op` from F₀.
pub fn iterate(op: &PicardOperator, config: &SolveConfig, rho0: f64, alpha_r: f64) -> Result<(Vec<RayGridFunction>, SolveReport)> {
    let estimate = match config.nu {
        Some(nu) => op.estimate(nu, config.ball_factor)?,
        None => select_nu(op, rho0, alpha_r, config.ball_factor)?,
    };
    let nu = estimate.nu;
    let mut report = SolveReport {
        iters: 0,
        norms: Vec::new(),
        diffs: Vec::new(),
        contraction_ratios: Vec::new(),
        ball_ok: estimate.ball_ok,
        contract_ok: estimate.contract_ok,
        converged: false,
        residual: f64::NAN,
        nu,
        estimate: Some(estimate),
        dropped_terms: 0,
        warnings: Vec::new(),
    };
    let mut f = op.f0.clone();
    report.norms.push(PicardOperator::norm_all(&f, nu)?);
    if op.terms.is_empty() {
        report.iters = 1;
        report.diffs.push(0.0);
        report.converged = true;
        report.residual = 0.0;
        return Ok((f, report));
    }
    for it in 0..config.max_iters {
        let (next, dropped) = op.step(&f, nu)?;
        report.dropped_terms = report.dropped_terms.max(dropped);
        let d = PicardOperator::diff_norm(&next, &f, nu)?;
        report.iters = it + 1;
        report.norms.push(PicardOperator::norm_all(&next, nu)?);
        if let Some(&prev) = report.diffs.last() {
            if prev > 0.0 {
                report.contraction_ratios.push(d / prev);
            }
        }
        report.diffs.push(d);
        f = next;
        if d < config.tol {
            report.converged = true;
            break;
        }
    }
    let (check, _) = op.step(&f, nu)?;
    report.residual = PicardOperator::diff_norm(&check, &f, nu)?;
    if !report.converged {
        report.contract_ok = false;
        report.warnings.push(format!("no convergence within {} iterations", config.max_iters));
    }
    Ok((f, report))
}

/// Solves the problem on the ray `config.theta`.
pub fn solve(problem: &PDEProblem, config: &SolveConfig) -> Result<(Vec<RayGridFunction>, SolveReport)> {
    let op = PicardOperator::new(problem, config)?;
    let alpha_r = problem.alpha_r().map(rat_to_f64).unwrap_or(1.0);
    let (f, mut report) = iterate(&op, config, problem.sector.rho, alpha_r)?;
    for v in validate_constraint(problem) {
        report.warnings.push(format!("{}: derivative weight {} > n = {}, the contraction estimate is not backed by the derivative budget", v.term, v.weight, v.n));
    }
    if config.epsilon_guard {
        if let Some(w) = epsilon_check(problem, &f)? {
            report.warnings.push(w);
        }
    }
    Ok((f, report))
}

/// Every configured ray, independently.
pub fn solve_all_rays(problem: &PDEProblem, config: &SolveConfig) -> Result<Vec<(f64, Vec<RayGridFunction>, SolveReport)>> {
    let mut out = Vec::new();
    let rays = if problem.sector.directions.is_empty() { vec![config.theta] } else { problem.sector.directions.clone() };
    for th in rays {
        let mut c = config.clone();
        c.theta = th;
        let (f, r) = solve(problem, &c)?;
        out.push((th, f, r));
    }
    Ok(out)
}

/// Resums on a few points of the ray and compares |f| with ε.
fn epsilon_check(problem: &PDEProblem, f: &[RayGridFunction]) -> Result<Option<String>> {
    let rho = problem.sector.rho.max(1.0);
    let k = f[0].nt() - 1;
    let mut worst = 0.0f64;
    for comp in f {
        for mult in [2.0, 4.0, 8.0] {
            let x = Complex64::from_polar(rho * mult, -comp.grid.theta);
            if let Ok(v) = crate::transforms::laplace_ray(comp, k, x) {
                worst = worst.max(v.value.norm());
            }
        }
    }
    if worst >= problem.epsilon {
        return Ok(Some(format!(
            "resummed |f| reaches {worst:.3e} ≥ ε = {}: the analyticity ball assumption is void",
            problem.epsilon
        )));
    }
    Ok(None)
}

/// Log-log fit of |F| near p = 0 at the last time node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallPFit {
    pub exponent: f64,
    /// K with |F| ≤ K |p|^{exponent} on the fitted nodes.
    pub k: f64,
    pub residual: f64,
    pub inconclusive: bool,
    pub nodes_used: usize,
}

pub fn small_p_exponent(f: &RayGridFunction) -> Result<SmallPFit> {
    let k = f.nt() - 1;
    let pts: Vec<(f64, f64)> = (0..f.grid.len())
        .filter(|&i| f.grid.nodes[i] < 0.1)
        .map(|i| (f.grid.nodes[i].ln(), f.at(i, k).norm()))
        .filter(|(_, v)| *v > 0.0)
        .map(|(x, v)| (x, v.ln()))
        .collect();
    if pts.len() < 8 {
        return Err(BorelError::Domain(format!("need ≥ 8 nonzero nodes below 0.1, have {}", pts.len())));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let residual = (pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    let kk = pts.iter().map(|p| (p.1 - slope * p.0).exp()).fold(0.0, f64::max);
    Ok(SmallPFit { exponent: slope, k: kk, residual, inconclusive: residual > 0.1, nodes_used: pts.len() })
}

/// Rescaled solution F̂(s, λ; t) = F(s t^{-1/n̂}, tλ) for one fixed t.
#[derive(Debug, Clone)]
pub struct ScaledState {
    pub t: f64,
    pub s_grid: RayGrid,
    pub lambda_nodes: ChebNodes,
    pub n_hat: Rational64,
    pub betas: Vec<Rational64>,
    pub gammas: Vec<Rational64>,
    pub omegas: Vec<Rational64>,
    /// Largest ω making the exponent differences integer multiples of nω.
    pub omega: Option<Rational64>,
    pub m_qk: Vec<(String, Rational64)>,
    pub values: Vec<RayGridFunction>,
}

/// t-degree a split over the setting variables: all c with Σ γ_i c_i = a.
fn splits(gammas: &[Rational64], a: Rational64) -> Vec<Vec<i64>> {
    if gammas.is_empty() {
        return if a.is_zero() { vec![Vec::new()] } else { Vec::new() };
    }
    let g = gammas[0];
    let mut out = Vec::new();
    let mut c = 0i64;
    while g * c <= a {
        for mut rest in splits(&gammas[1..], a - g * c) {
            rest.insert(0, c);
            out.push(rest);
        }
        c += 1;
    }
    out
}

/// Decay exponents α_{q,j} per q in the setting's form
/// b_{q,k} = x^{-β|k|} Σ_j x^{-α_{q,j}} 𝔭_j(t^{γ_1}x^{-β_1}, ...).
/// A monomial c t^a x^e admits every α = -e - β|k| - Σ β_i c_i with
/// Σ γ_i c_i = a; the table is a greedy smallest cover of all monomials
/// (ties go to the larger α). Sorted decreasingly, so α_{q,1} comes first.
pub fn setting_alpha_table(
    problem: &PDEProblem,
    setting: &ScaledSetting,
) -> Result<BTreeMap<Vec<crate::problem::DerivFactor>, Vec<Rational64>>> {
    let mut cands: BTreeMap<Vec<crate::problem::DerivFactor>, Vec<Vec<Rational64>>> = BTreeMap::new();
    for t in &problem.terms {
        let scale = t.coeff.terms().iter().flat_map(|m| m.coeff.c.iter().map(|c| c.norm())).fold(0.0, f64::max);
        let entry = cands.entry(t.q_key()).or_default();
        for m in t.coeff.terms() {
            for (a, c) in m.coeff.c.iter().enumerate() {
                if c.norm() <= 1e-12 * scale {
                    continue;
                }
                let a = Rational64::from_integer(a as i64);
                let base = -m.exponent - setting.beta * t.k_abs() as i64;
                let opts: Vec<Rational64> = splits(&setting.gammas, a)
                    .into_iter()
                    .map(|c| base - c.iter().zip(&setting.betas).map(|(ci, b)| *b * *ci).sum::<Rational64>())
                    .collect();
                if opts.is_empty() {
                    return Err(BorelError::SettingRejected(format!(
                        "{}: t^{a} x^{} does not fit the setting variables",
                        t.label(),
                        m.exponent
                    )));
                }
                entry.push(opts);
            }
        }
    }
    let mut table = BTreeMap::new();
    for (q, mut open) in cands {
        let mut chosen: Vec<Rational64> = Vec::new();
        while !open.is_empty() {
            let mut count: BTreeMap<Rational64, usize> = BTreeMap::new();
            for opts in &open {
                let mut o = opts.clone();
                o.sort();
                o.dedup();
                for a in o {
                    *count.entry(a).or_default() += 1;
                }
            }
            let best = count.iter().max_by(|x, y| x.1.cmp(y.1).then(x.0.cmp(y.0))).map(|(a, _)| *a).expect("nonempty");
            chosen.push(best);
            open.retain(|opts| !opts.contains(&best));
        }
        chosen.sort_by(|x, y| y.cmp(x));
        table.insert(q, chosen);
    }
    Ok(table)
}

/// m_{q,k} = n̂ + ω₁(|q|-1) - α_{q,1} + (ω₁-β)|k| - (n̂/n) Σ j q_{l,j}.
pub fn m_qk(problem: &PDEProblem, setting: &ScaledSetting) -> Result<Vec<(String, Rational64)>> {
    let nh = setting.n_hat();
    let w1 = setting.omegas[0];
    let table = setting_alpha_table(problem, setting)?;
    Ok(problem
        .terms
        .iter()
        .map(|t| {
            let a1 = table.get(&t.q_key()).and_then(|a| a.first()).copied().unwrap_or_else(Rational64::zero);
            let m = nh + w1 * (t.q_abs() as i64 - 1) - a1 + (w1 - setting.beta) * t.k_abs() as i64
                - nh / problem.n as i64 * t.derivative_weight() as i64;
            (t.label(), m)
        })
        .collect())
}

fn rat_gcd(a: Rational64, b: Rational64) -> Rational64 {
    // gcd(p/q, r/s) = gcd(ps, rq)/(qs)
    let (p, q) = (*a.numer(), *a.denom());
    let (r, s) = (*b.numer(), *b.denom());
    let g = (p * s).gcd(&(r * q));
    Rational64::new(g, q * s)
}

/// Largest ω with every listed quantity an integer multiple of nω.
pub fn lattice_omega(problem: &PDEProblem, setting: &ScaledSetting) -> Result<Option<Rational64>> {
    let n = problem.n as i64;
    let mut vals: Vec<Rational64> = m_qk(problem, setting)?.into_iter().map(|(_, m)| m).collect();
    let w1 = setting.omegas[0];
    vals.extend(setting.omegas.iter().skip(1).map(|w| *w - w1));
    for alphas in setting_alpha_table(problem, setting)?.values() {
        vals.extend(alphas.iter().skip(1).map(|a| alphas[0] - *a));
    }
    for (b, g) in setting.betas.iter().zip(&setting.gammas).skip(1) {
        vals.push(*g * n - *b);
    }
    Ok(vals.into_iter().filter(|v| !v.is_zero()).map(|v| v.abs()).reduce(rat_gcd).map(|g| g / n))
}

/// Solves the rescaled equation in (s, λ) at a fixed time t.
pub fn scaled_solve(problem: &PDEProblem, config: &SolveConfig, t: f64) -> Result<(ScaledState, SolveReport)> {
    let setting = problem
        .setting
        .clone()
        .ok_or_else(|| BorelError::SettingRejected("problem has no [setting] data".into()))?;
    validate_setting(problem, &setting)?;
    let mqk = m_qk(problem, &setting)?;
    if let Some((label, m)) = mqk.iter().find(|(_, m)| *m < Rational64::zero()) {
        return Err(BorelError::SettingRejected(format!("m_(q,k) = {m} < 0 for {label}")));
    }
    let nh = setting.n_hat();
    let op = scaled_operator(problem, config, t, nh)?;
    let alpha_r = problem.alpha_r().map(rat_to_f64).unwrap_or(1.0);
    let (values, report) = iterate(&op, config, 0.0, alpha_r)?;
    let state = ScaledState {
        t,
        s_grid: op.grid.clone(),
        lambda_nodes: op.times.clone(),
        n_hat: nh,
        betas: setting.betas.clone(),
        gammas: setting.gammas.clone(),
        omegas: setting.omegas.clone(),
        omega: lattice_omega(problem, &setting)?,
        m_qk: mqk,
        values,
    };
    Ok((state, report))
}

fn validate_setting(problem: &PDEProblem, s: &ScaledSetting) -> Result<()> {
    if s.betas.is_empty() || s.betas.len() != s.gammas.len() || s.omegas.is_empty() {
        return Err(BorelError::SettingRejected("need matching β_i, γ_i and at least one ω_j".into()));
    }
    if s.gammas.iter().any(|g| *g <= Rational64::zero()) || s.betas.iter().any(|b| *b <= Rational64::zero()) {
        return Err(BorelError::SettingRejected("β_i, γ_i must be positive".into()));
    }
    let nh = s.n_hat();
    if nh < Rational64::from_integer(problem.n as i64) {
        return Err(BorelError::SettingRejected(format!("n̂ = {nh} < n = {}", problem.n)));
    }
    for w in s.betas.iter().zip(&s.gammas).collect::<Vec<_>>().windows(2) {
        let (r0, r1) = (*w[0].0 / *w[0].1, *w[1].0 / *w[1].1);
        if r1 > r0 || (r1 == r0 && w[1].0 >= w[0].0) {
            return Err(BorelError::SettingRejected("β_i/γ_i must be ordered decreasingly".into()));
        }
    }
    if s.omegas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(BorelError::SettingRejected("ω_j must increase".into()));
    }
    if s.beta < Rational64::zero() {
        return Err(BorelError::SettingRejected("β must be nonnegative".into()));
    }
    Ok(())
}

/// A p-side series with t-polynomial coefficients rewritten in (s, λ):
/// c(tλ) p^e ↦ c(tλ) t^{-e/n̂} s^e, times t^{extra}.
fn rescale_series(b: &RamifiedSeries<Complex64>, t: f64, nh: f64, extra: f64) -> Result<RamifiedSeries<Complex64>> {
    let terms = b
        .terms()
        .iter()
        .map(|m| {
            let f = t.powf(-rat_to_f64(m.exponent) / nh + extra);
            let c = m
                .coeff
                .c
                .iter()
                .enumerate()
                .map(|(k, v)| v * t.powi(k as i32) * f)
                .collect();
            RamifiedMonomial::new(m.exponent, TPoly::from_coeffs(c))
        })
        .collect();
    RamifiedSeries::with_ramification(VarTag::P, terms, b.ramification())
}

fn scaled_operator(problem: &PDEProblem, config: &SolveConfig, t: f64, nh: Rational64) -> Result<PicardOperator> {
    config.validate()?;
    if problem.d != 1 {
        return Err(BorelError::Unsupported("the grid solver handles d = 1 only".into()));
    }
    if !(t > 0.0) {
        return Err(BorelError::Domain("scaled solve needs t > 0".into()));
    }
    let cone = check_cone_condition(&problem.symbol, problem.sector.phi, 512)?;
    if !cone.ok {
        return Err(BorelError::ConeNotVerified);
    }
    let nhf = rat_to_f64(nh);
    let (r, fi) = borel_data(problem)?;
    let r_hat: Vec<_> = r.iter().map(|s| rescale_series(s, t, nhf, 0.0)).collect::<Result<_>>()?;
    let fi_hat: Vec<_> = fi.iter().map(|s| rescale_series(s, t, nhf, 0.0)).collect::<Result<_>>()?;
    let mut terms = Vec::new();
    for term in &problem.terms {
        let bc = BorelCoeff::from_x_series(&term.coeff)?;
        // δ(p) = t^{1/n̂} δ(s).
        let delta = TPoly::from_coeffs(
            bc.delta.c.iter().enumerate().map(|(k, v)| v * t.powi(k as i32) * t.powf(1.0 / nhf)).collect(),
        );
        let series = rescale_series(&bc.series, t, nhf, 0.0)?;
        let mu = 1.0 - (term.q_abs() + term.k_abs() + term.derivative_weight()) as f64 / nhf;
        terms.push(SysTerm {
            label: term.label(),
            equation: term.equation,
            k: term.k.0.clone(),
            q: term.q.iter().map(|f| (f.component, f.j.abs(), f.power)).collect(),
            coeff: BorelCoeff { delta, series },
            prefactor: t.powf(mu),
        });
    }
    let refs: Vec<&RamifiedSeries<Complex64>> = r_hat.iter().chain(&fi_hat).collect();
    let a = origin_of(&refs);
    let n = lcm_all(
        problem
            .ramification
            .iter()
            .copied()
            .chain(refs.iter().map(|s| s.ramification()))
            .chain(terms.iter().map(|t| t.coeff.series.ramification())),
    );
    let grid = RayGrid::standard(config.theta, config.nodes, config.p_max, a, n)?;
    let times = ChebNodes::new(config.time_nodes, 1.0);
    let scale = t.powf(-1.0 / nhf);
    let symbol_vals: Vec<Vec<Complex64>> = (0..problem.m)
        .map(|l| (0..grid.len()).map(|i| problem.symbol.at_minus_p_1d(l, grid.point(i) * scale) * t).collect())
        .collect();
    let duhamel: Vec<Duhamel> = symbol_vals.iter().map(|a| Duhamel::new(a, &times, config.time_quad_order)).collect();
    let mut op = PicardOperator {
        grid,
        times,
        f0: Vec::new(),
        terms,
        duhamel,
        symbol_vals,
        horizon: 1.0,
        drop_tol: config.tol / 100.0,
    };
    // Series coefficients already carry t^k; λ is the polynomial variable.
    op.f0 = (0..problem.m)
        .map(|l| op.build_f0_component(&fi_hat[l], &r_hat[l], |lam| lam, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{DerivFactor, MultiIndex, NonlinearTerm, SymbolPolynomial};

    fn xmono(e: Rational64, c: f64) -> RamifiedSeries<Complex64> {
        RamifiedSeries::monomial(VarTag::X, e, Complex64::new(c, 0.0)).unwrap()
    }

    fn linear() -> PDEProblem {
        PDEProblem::linear_1d(SymbolPolynomial::minus_d_pow(3), xmono(Rational64::from_integer(-2), 1.0), RamifiedSeries::zero(VarTag::X))
    }

    fn small() -> SolveConfig {
        SolveConfig { nodes: 384, time_nodes: 10, ..Default::default() }
    }

    #[test]
    fn linear_closed_form() {
        let (f, rep) = solve(&linear(), &small()).unwrap();
        assert!(rep.converged && rep.ball_ok && rep.contract_ok);
        let g = &f[0];
        let mut worst = 0.0f64;
        for k in 0..g.nt() {
            let t = g.times.t[k];
            for i in 0..g.grid.len() {
                let p = g.grid.nodes[i];
                let exact = -(-p.powi(3) * t).exp_m1() / (p * p);
                worst = worst.max((g.at(i, k).re - exact).abs());
            }
        }
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn zero_data_gives_zero() {
        let p = PDEProblem::linear_1d(SymbolPolynomial::minus_d_pow(3), RamifiedSeries::zero(VarTag::X), RamifiedSeries::zero(VarTag::X));
        let (f, _) = solve(&p, &small()).unwrap();
        assert!(f[0].values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn small_p_exponent_linear() {
        let (f, _) = solve(&linear(), &small()).unwrap();
        let fit = small_p_exponent(&f[0]).unwrap();
        assert!((fit.exponent - 1.0).abs() < 0.01 && !fit.inconclusive, "{fit:?}");
    }

    #[test]
    fn weakly_nonlinear_contracts() {
        let mut p = linear();
        p.terms.push(NonlinearTerm {
            equation: 0,
            k: MultiIndex(vec![1]),
            q: vec![DerivFactor { component: 0, j: MultiIndex(vec![1]), power: 1 }],
            coeff: xmono(Rational64::from_integer(-1), 1e-2),
        });
        let (_, rep) = solve(&p, &small()).unwrap();
        assert!(rep.converged, "{rep:?}");
        assert!(rep.contraction_ratios.iter().all(|r| *r < 0.5), "{:?}", rep.contraction_ratios);
        assert!(rep.residual < 1e-8);
        let est = rep.estimate.unwrap();
        assert!(est.contract_ok && est.ball_ok);
        for r in &rep.contraction_ratios {
            assert!(*r <= est.lipschitz + 0.05);
        }
    }

    #[test]
    fn scaled_matches_unscaled_linear() {
        let mut p = linear();
        p.setting = Some(ScaledSetting {
            betas: vec![Rational64::from_integer(3)],
            gammas: vec![Rational64::from_integer(1)],
            omegas: vec![Rational64::from_integer(2)],
            beta: Rational64::from_integer(0),
            analytic: true,
        });
        let t = 0.5;
        let (st, _) = scaled_solve(&p, &small(), t).unwrap();
        let lam = st.values[0].nt() - 1;
        for &s in &[0.05, 0.5, 2.0] {
            let pp = s * t.powf(-1.0 / 3.0);
            let exact = -(-pp.powi(3) * t).exp_m1() / (pp * pp);
            let v = st.values[0].eval(s, lam).re;
            assert!((v - exact).abs() < 1e-6, "{s}: {v} vs {exact}");
        }
    }
}

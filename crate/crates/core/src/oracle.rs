//! Reference integrator on the real x axis: method of lines with 9-point
//! central differences and two-stage L-stable SDIRK in time.
//!
//! On the real axis dispersive waves of f_t = f_xxx travel in from the left,
//! so the PDE alone does not determine f on a truncated interval. The two
//! ends carry four-node strips whose values come from a caller-supplied
//! boundary function; the interior is integrated independently.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{BorelError, Result};
use crate::problem::PDEProblem;
use crate::quad::fornberg;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub h: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Snapshots are stored at these times (rounded to the step grid).
    pub output_times: Vec<f64>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { x_min: 3.5, x_max: 22.0, h: 0.1, dt: 2e-3, t_end: 1.0, output_times: vec![0.25, 0.5, 0.75, 1.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    /// Interior nodes.
    pub x: Vec<f64>,
    /// (t, f at interior nodes).
    pub snapshots: Vec<(f64, Vec<f64>)>,
    pub steps: usize,
    pub max_inner_iters: usize,
}

impl OracleResult {
    /// Linear interpolation of the snapshot closest to `t`.
    pub fn value(&self, x: f64, t: f64) -> Option<f64> {
        let (_, snap) = self.snapshots.iter().min_by(|a, b| (a.0 - t).abs().total_cmp(&(b.0 - t).abs()))?;
        let h = self.x[1] - self.x[0];
        let i = ((x - self.x[0]) / h).floor();
        if i < 0.0 || i as usize + 1 >= self.x.len() {
            return None;
        }
        let i = i as usize;
        let w = (x - self.x[i]) / h;
        Some(snap[i] * (1.0 - w) + snap[i + 1] * w)
    }
}

const STRIP: usize = 4;

fn real(c: Complex64, what: &str) -> Result<f64> {
    if c.im.abs() > 1e-12 * c.re.abs().max(1.0) {
        return Err(BorelError::Unsupported(format!("oracle needs real {what}")));
    }
    Ok(c.re)
}

struct Mol<'a> {
    problem: &'a PDEProblem,
    x: Vec<f64>,
    /// d[j] = central weights for ∂^j on offsets -4..=4.
    d: Vec<Vec<f64>>,
    a: DMatrix<f64>,
}

impl<'a> Mol<'a> {
    fn deriv(&self, full: &[f64], i: usize, j: usize) -> f64 {
        if j == 0 {
            return full[i];
        }
        self.d[j].iter().enumerate().map(|(o, w)| w * full[i + o - 4]).sum()
    }

    /// Nonlinear terms plus forcing at the free node i (index into `full`).
    fn rhs_extra(&self, full: &[f64], i: usize, t: f64) -> Result<f64> {
        let x = Complex64::new(self.x[i], 0.0);
        let mut acc = real(self.problem.forcing[0].eval(x, t), "forcing")?;
        for term in &self.problem.terms {
            let b = real(term.coeff.eval(x, t), "coefficients")?;
            let mut v = b * full[i].powi(term.k.0[0] as i32);
            for f in &term.q {
                v *= self.deriv(full, i, f.j.abs() as usize).powi(f.power as i32);
            }
            acc += v;
        }
        Ok(acc)
    }
}

/// Integrates f_t + P(∂_x) f = Σ b f^k Π(∂^j f)^q + r on [x_min, x_max].
pub fn oracle_integrate(
    problem: &PDEProblem,
    cfg: &OracleConfig,
    boundary: &dyn Fn(f64, f64) -> f64,
) -> Result<OracleResult> {
    if problem.d != 1 || problem.m != 1 {
        return Err(BorelError::Unsupported("the oracle handles scalar d = 1 problems".into()));
    }
    if !(cfg.x_min > problem.sector.rho) {
        return Err(BorelError::Domain(format!("x_min = {} must exceed ρ = {}", cfg.x_min, problem.sector.rho)));
    }
    if !(cfg.h > 0.0 && cfg.dt > 0.0 && cfg.dt <= 0.1 && cfg.x_max > cfg.x_min + 12.0 * cfg.h) {
        return Err(BorelError::Domain("oracle needs h, dt > 0, dt ≤ 0.1 and at least 12 nodes".into()));
    }
    let n = problem.n as usize;
    if n > 4 || problem.terms.iter().any(|t| t.q.iter().any(|f| f.j.abs() as usize > 4 || f.component != 0)) {
        return Err(BorelError::Unsupported("oracle stencils cover derivatives up to order 4".into()));
    }
    let m = ((cfg.x_max - cfg.x_min) / cfg.h).round() as usize + 1;
    let x: Vec<f64> = (0..m).map(|i| cfg.x_min + cfg.h * i as f64).collect();
    let offs: Vec<f64> = (-4..=4).map(|o| o as f64).collect();
    let fw = fornberg(0.0, &offs, 4);
    let d: Vec<Vec<f64>> = (0..=4).map(|j| fw[j].iter().map(|w| w / cfg.h.powi(j as i32)).collect()).collect();
    // Linear operator -P(∂) on the full vector.
    let mut a = DMatrix::<f64>::zeros(m, m);
    for (mi, c) in &problem.symbol.comps[0] {
        let j = mi.abs() as usize;
        let c = real(*c, "symbol")?;
        for i in STRIP..m - STRIP {
            if j == 0 {
                a[(i, i)] -= c;
            } else {
                for (o, w) in d[j].iter().enumerate() {
                    a[(i, i + o - 4)] -= c * w;
                }
            }
        }
    }
    let mol = Mol { problem, x: x.clone(), d, a };
    let free: Vec<usize> = (STRIP..m - STRIP).collect();
    let nf = free.len();
    let af = DMatrix::from_fn(nf, nf, |r, c| mol.a[(free[r], free[c])]);
    let gamma = 1.0 - 1.0 / 2f64.sqrt();

    let mut dt = cfg.dt;
    for _attempt in 0..4 {
        match march(&mol, &af, &free, cfg, dt, gamma, boundary) {
            Ok(r) => return Ok(r),
            Err(BorelError::Diverged { .. }) => dt *= 0.5,
            Err(e) => return Err(e),
        }
    }
    Err(BorelError::Integration(format!("step-size rejection cascade down to dt = {dt:.2e}")))
}

fn march(
    mol: &Mol,
    af: &DMatrix<f64>,
    free: &[usize],
    cfg: &OracleConfig,
    dt: f64,
    gamma: f64,
    boundary: &dyn Fn(f64, f64) -> f64,
) -> Result<OracleResult> {
    let m = mol.x.len();
    let nf = free.len();
    let lu = (DMatrix::identity(nf, nf) - af * (gamma * dt)).lu();
    let steps = (cfg.t_end / dt).round() as usize;
    let mut full = vec![0.0; m];
    for i in 0..m {
        full[i] = real(mol.problem.initial[0].eval(Complex64::new(mol.x[i], 0.0), 0.0), "initial data")?;
    }
    let set_boundary = |v: &mut [f64], t: f64| {
        for i in (0..STRIP).chain(m - STRIP..m) {
            v[i] = boundary(mol.x[i], t);
        }
    };
    set_boundary(&mut full, 0.0);
    // Stage solve: (I - γ dt A) k = A w + N(w + γ dt k) + r, w = current stage base.
    let mut max_inner = 0usize;
    let stage = |base: &[f64], ts: f64, max_inner: &mut usize| -> Result<DVector<f64>> {
        let mut w = base.to_vec();
        set_boundary(&mut w, ts);
        let aw = DVector::from_iterator(nf, free.iter().map(|&i| (0..m).map(|c| mol.a[(i, c)] * w[c]).sum::<f64>()));
        // Boundary nodes in the full A·w use ts values; the implicit part only touches free nodes.
        let mut k = DVector::<f64>::zeros(nf);
        for it in 0..50 {
            let mut trial = w.clone();
            for (r, &i) in free.iter().enumerate() {
                trial[i] += gamma * dt * k[r];
            }
            let mut rhs = aw.clone();
            for (r, &i) in free.iter().enumerate() {
                rhs[r] += mol.rhs_extra(&trial, i, ts)?;
            }
            let next = lu.solve(&rhs).ok_or_else(|| BorelError::Integration("singular stage matrix".into()))?;
            let delta = (&next - &k).amax();
            k = next;
            if !k.iter().all(|v| v.is_finite()) {
                return Err(BorelError::Diverged { p: f64::NAN, t: ts });
            }
            if mol.problem.terms.is_empty() || delta <= 1e-14 * k.amax().max(1e-300) {
                *max_inner = (*max_inner).max(it + 1);
                return Ok(k);
            }
        }
        Err(BorelError::Diverged { p: f64::NAN, t: ts })
    };
    let mut snapshots = Vec::new();
    let mut want: Vec<(usize, f64)> =
        cfg.output_times.iter().map(|&t| (((t / dt).round() as usize).min(steps), t)).collect();
    want.sort_by_key(|w| w.0);
    let record = |step: usize, full: &[f64], snaps: &mut Vec<(f64, Vec<f64>)>, want: &mut Vec<(usize, f64)>| {
        while let Some(&(s, _)) = want.first() {
            if s != step {
                break;
            }
            snaps.push((step as f64 * dt, free.iter().map(|&i| full[i]).collect()));
            want.remove(0);
        }
    };
    record(0, &full, &mut snapshots, &mut want);
    for step in 0..steps {
        let t = step as f64 * dt;
        // Boundary values for A·w enter through w at the stage time.
        let k1 = stage(&full, t + gamma * dt, &mut max_inner)?;
        let mut u1 = full.clone();
        for (r, &i) in free.iter().enumerate() {
            u1[i] += (1.0 - gamma) * dt * k1[r];
        }
        let k2 = stage(&u1, t + dt, &mut max_inner)?;
        for (r, &i) in free.iter().enumerate() {
            full[i] = u1[i] + gamma * dt * k2[r];
        }
        set_boundary(&mut full, t + dt);
        record(step + 1, &full, &mut snapshots, &mut want);
    }
    Ok(OracleResult {
        x: free.iter().map(|&i| mol.x[i]).collect(),
        snapshots,
        steps,
        max_inner_iters: max_inner,
    })
}

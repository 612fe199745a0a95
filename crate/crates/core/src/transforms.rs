//! Directional Laplace transform, contour inverse Laplace transform and
//! acceleration from order n to the canonical level in x^{n/(n-1)}.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{BorelError, Result};
use crate::grid::RayGridFunction;
use crate::quad::{gauss_jacobi_unit, gauss_legendre, integrate, integrate_c};
use crate::special::gamma;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaplaceValue {
    pub value: Complex64,
    /// Size of the dropped tail beyond the last node.
    pub tail: f64,
}

/// ∫₀^{∞e^{iθ}} F(p) e^{-px} dp for F = s^a φ(s^{1/N}) given as a function of
/// the radial variable s, truncated at `s_max`.
pub fn laplace_fn(
    f: impl Fn(f64) -> Complex64,
    a: f64,
    n: u32,
    theta: f64,
    s_max: f64,
    x: Complex64,
) -> Result<LaplaceValue> {
    let dir = Complex64::from_polar(1.0, theta);
    let z = dir * x;
    if z.re <= 0.0 {
        return Err(BorelError::Domain(format!(
            "Laplace transform needs Re(e^{{iθ}}x) > 0, got {:.3e} at x = {x}",
            z.re
        )));
    }
    let n = n.max(1) as f64;
    let kern = |s: f64| (-z * s).exp() * dir;
    // Head [0, L]: s = L v^N, weight v^{N(a+1)-1}.
    let l = 0.5f64.min(s_max);
    let gj = gauss_jacobi_unit(24, n * (a + 1.0) - 1.0);
    let mut total = Complex64::zero();
    for (v, w) in gj.nodes.iter().zip(&gj.weights) {
        let s = l * v.powf(n);
        let phi = if s > 0.0 { f(s) * s.powf(-a) } else { Complex64::zero() };
        total += phi * kern(s) * (w * n * l.powf(a + 1.0));
    }
    let mut peak = total.norm();
    let gl = gauss_legendre(16);
    let mut lo = l;
    let width = (0.25f64).min(4.0 / z.norm());
    let mut tail = 0.0;
    while lo < s_max {
        let hi = (lo + width).min(s_max);
        let mut part = Complex64::zero();
        for (xn, w) in gl.nodes.iter().zip(&gl.weights) {
            let s = lo + 0.5 * (hi - lo) * (xn + 1.0);
            part += f(s) * kern(s) * (0.5 * (hi - lo) * w);
        }
        total += part;
        peak = peak.max(part.norm());
        lo = hi;
        let edge = (f(lo) * kern(lo)).norm();
        tail = edge / z.re;
        if edge < 1e-16 * peak.max(1e-300) {
            tail = 0.0;
            break;
        }
    }
    if tail > 1e-6 * total.norm().max(1e-300) {
        return Err(BorelError::Domain(format!(
            "integrand not decayed at |p| = {s_max}: x = {x} is outside the half-plane of convergence (tail {tail:.2e})"
        )));
    }
    Ok(LaplaceValue { value: total, tail })
}

/// Laplace transform of a grid function at time node `k`.
pub fn laplace_ray(f: &RayGridFunction, k: usize, x: Complex64) -> Result<LaplaceValue> {
    laplace_fn(|s| f.eval(s, k), f.grid.a(), f.grid.ramification, f.grid.theta, f.grid.p_max(), x)
}

/// Laplace transform at an arbitrary time τ ∈ [0, T] (Chebyshev interpolation).
pub fn laplace_ray_at(f: &RayGridFunction, tau: f64, x: Complex64) -> Result<LaplaceValue> {
    laplace_fn(|s| f.eval_st(s, tau), f.grid.a(), f.grid.ramification, f.grid.theta, f.grid.p_max(), x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContourSpec {
    /// Vertex of the contour on the positive axis.
    pub rho1: f64,
    /// Arms leave the vertex at angles ±(π/2 + phi).
    pub phi: f64,
    /// Arm length; `None` picks it from the decay of e^{px}.
    pub truncation: Option<f64>,
    pub nodes: usize,
}

impl Default for ContourSpec {
    fn default() -> Self {
        Self { rho1: 1.0, phi: PI / 8.0, truncation: None, nodes: 20 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IltValue {
    pub value: Complex64,
    pub truncation_error: f64,
}

/// (2πi)^{-1} ∫ e^{px} g(x) dx over the wedge contour with vertex ρ₁.
pub fn inverse_laplace_contour(g: impl Fn(Complex64) -> Complex64, p: Complex64, spec: &ContourSpec) -> Result<IltValue> {
    if !(spec.phi > 0.0 && spec.phi < PI / 2.0) {
        return Err(BorelError::Domain("contour arm angle must lie in (0, π/2)".into()));
    }
    let psi = PI / 2.0 + spec.phi;
    let up = Complex64::from_polar(1.0, psi);
    let down = up.conj();
    let decay = -(p * up).re.max((p * down).re);
    if decay <= 0.0 {
        return Err(BorelError::Domain(format!("p = {p} does not make e^{{px}} decay along both arms")));
    }
    let len = spec.truncation.unwrap_or(45.0 / decay);
    let v = Complex64::new(spec.rho1, 0.0);
    let arm = |dir: Complex64, r: f64| (p * (v + dir * r)).exp() * g(v + dir * r) * dir;
    let tol = 1e-12;
    let mut total = Complex64::zero();
    // Panels growing geometrically from the vertex.
    let mut lo = 0.0;
    let mut w = (0.5 / decay).min(0.5);
    while lo < len {
        let hi = (lo + w).min(len);
        total += integrate_c(|r| arm(up, r) - arm(down, r), lo, hi, tol);
        lo = hi;
        w *= 1.5;
    }
    let truncation_error = (arm(up, len).norm() + arm(down, len).norm()) / decay / (2.0 * PI);
    Ok(IltValue { value: total / Complex64::new(0.0, 2.0 * PI), truncation_error })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AccelerationSpec {
    pub n: u32,
    /// Contour arm angle at the saddle (measured from the positive axis).
    pub arm_angle: f64,
    pub q_max: f64,
    pub quad_nodes: usize,
}

impl AccelerationSpec {
    pub fn new(n: u32) -> Self {
        Self { n, arm_angle: 0.75 * PI, q_max: 60.0, quad_nodes: 20 }
    }
    pub fn alpha(&self) -> f64 {
        (self.n as f64 - 1.0) / self.n as f64
    }
    /// c = β α^{α/β}, β = 1 - α, the rate in C_α(x) ~ e^{-c x}.
    pub fn c_rate(&self) -> f64 {
        let a = self.alpha();
        let b = 1.0 - a;
        b * a.powf(a / b)
    }
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(BorelError::Domain("acceleration needs n ≥ 2".into()));
        }
        if !(self.arm_angle > PI / 2.0 && self.arm_angle < PI) {
            return Err(BorelError::Domain("arm angle must lie in (π/2, π)".into()));
        }
        Ok(())
    }
}

/// n = 2 closed form q p^{-3/2} e^{-q²/(4p)} / (2√π).
pub fn kernel_n2(p: f64, q: f64) -> f64 {
    q * p.powf(-1.5) * (-q * q / (4.0 * p)).exp() / (2.0 * PI.sqrt())
}

/// K(p,q) = (2πi)^{-1} ∫ e^{pu - q u^α} du along a wedge through the saddle.
pub fn acceleration_kernel_contour(p: f64, q: f64, spec: &AccelerationSpec) -> Result<f64> {
    spec.validate()?;
    if !(p > 0.0 && q > 0.0) {
        return Err(BorelError::Domain("kernel needs p, q > 0".into()));
    }
    let a = spec.alpha();
    let nf = spec.n as f64;
    // Saddle u* = (αq/p)^n; the exponent there is -(1-α)/α · p u*.
    let us = (a * q / p).powf(nf);
    let h = |u: Complex64| p * u - q * u.powf(a);
    let h0 = h(Complex64::new(us, 0.0)).re;
    let dir = Complex64::from_polar(1.0, spec.arm_angle);
    let decay = p * (-spec.arm_angle.cos());
    let curv = (q * a * (1.0 - a) * us.powf(a - 2.0)).max(1e-300);
    let width = (1.0 / curv.sqrt()).min(1.0 / decay);
    let len = 60.0 / decay + 10.0 * width;
    // K is real: (1/π) Im ∫ e^{h} dir dr along the upper arm, scaled by e^{-h0}.
    let f = |r: f64| {
        let u = Complex64::new(us, 0.0) + dir * r;
        ((h(u) - h0).exp() * dir).im
    };
    let mut total = 0.0;
    let mut lo = 0.0;
    let mut w = width;
    while lo < len {
        let hi = (lo + w).min(len);
        total += integrate(f, lo, hi, 1e-12);
        lo = hi;
        w *= 1.5;
    }
    Ok(total / PI * h0.exp())
}

/// Production kernel: closed form for n = 2, contour quadrature otherwise.
pub fn acceleration_kernel(p: f64, q: f64, spec: &AccelerationSpec) -> Result<f64> {
    if spec.n == 2 {
        if !(p > 0.0 && q > 0.0) {
            return Err(BorelError::Domain("kernel needs p, q > 0".into()));
        }
        return Ok(kernel_n2(p, q));
    }
    acceleration_kernel_contour(p, q, spec)
}

/// C_α(ξ) with K(p,q) = (q/p)^n C(q^n/p^{n-1}), sampled at p = 1.
pub fn c_alpha(xi: f64, spec: &AccelerationSpec) -> Result<f64> {
    let q = xi.powf(1.0 / spec.n as f64);
    Ok(acceleration_kernel(1.0, q, spec)? / q.powi(spec.n as i32))
}

/// Certificate |G(q)| ≤ C e^{ν q^n}, as produced by the exponential norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthCertificate {
    pub n: u32,
    pub nu: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccelerationResult {
    /// (p, G₁(p), kernel error estimate).
    pub g1_samples: Vec<(f64, Complex64, f64)>,
    pub kernel_error: f64,
    /// (x, ∫e^{-px}G dp, ∫e^{-p x^{n/(n-1)}} G₁ dp).
    pub identity_check: Vec<(f64, Complex64, Complex64)>,
}

/// q beyond which e^{-c q^n / p^{n-1}} is negligible against the certified growth.
fn kernel_cutoff(p: f64, spec: &AccelerationSpec, cert: &GrowthCertificate) -> f64 {
    let nf = spec.n as f64;
    let c = spec.c_rate();
    // K ≲ exp(-c (q^n/p^{n-1})^{1/(n-1)}) = exp(-c q^{n/(n-1)} / p).
    let mut q = 1.0;
    while q < spec.q_max && (-c * q.powf(nf / (nf - 1.0)) / p + cert.nu * q.powi(spec.n as i32)).exp() * cert.bound > 1e-18 {
        q *= 1.2;
    }
    q.min(spec.q_max)
}

/// G₁(p) = ∫₀^{q_max} K(p,q) G(q) dq.
pub fn accelerate_point(
    g: &dyn Fn(f64) -> Complex64,
    p: f64,
    spec: &AccelerationSpec,
    cert: &GrowthCertificate,
) -> Result<(Complex64, f64)> {
    let qc = kernel_cutoff(p, spec, cert);
    let mut err = 0.0;
    let f = |q: f64| -> Complex64 {
        if q <= 0.0 {
            return Complex64::zero();
        }
        match acceleration_kernel(p, q, spec) {
            Ok(k) => g(q) * k,
            Err(_) => Complex64::new(f64::NAN, 0.0),
        }
    };
    let mut total = Complex64::zero();
    let panels = 16usize.max(spec.quad_nodes);
    let h = qc / panels as f64;
    for i in 0..panels {
        let (lo, hi) = (h * i as f64, h * (i + 1) as f64);
        let fine = integrate_c(f, lo, hi, 1e-11);
        let coarse = crate::quad::gl_fixed_c(f, lo, hi, 10);
        err += (fine - coarse).norm().min(1e-10 * fine.norm().max(1e-300));
        total += fine;
    }
    if !total.re.is_finite() || !total.im.is_finite() {
        return Err(BorelError::Quadrature(format!("kernel quadrature failed at p = {p}")));
    }
    Ok((total, err))
}

/// Accelerates G on a p-grid and checks the Laplace identity at the given x.
pub fn accelerate(
    g: &dyn Fn(f64) -> Complex64,
    certificate: Option<GrowthCertificate>,
    p_grid: &[f64],
    identity_x: &[f64],
    spec: &AccelerationSpec,
) -> Result<AccelerationResult> {
    spec.validate()?;
    let cert = certificate.ok_or_else(|| BorelError::NoGrowthCertificate("no growth certificate supplied; refusing a divergent acceleration".into()))?;
    if cert.n != spec.n || !cert.nu.is_finite() || !cert.bound.is_finite() {
        return Err(BorelError::NoGrowthCertificate(format!("certificate is for order {} but acceleration is of order {}", cert.n, spec.n)));
    }
    let mut g1_samples = Vec::with_capacity(p_grid.len());
    let mut kernel_error = 0.0f64;
    for &p in p_grid {
        let (v, e) = accelerate_point(g, p, spec, &cert)?;
        kernel_error = kernel_error.max(e);
        g1_samples.push((p, v, e));
    }
    let mut identity_check = Vec::new();
    let nf = spec.n as f64;
    for &x in identity_x {
        let lhs = integrate_c_inf(|q| g(q) * (-q * x).exp(), 1.0 / x);
        let big_x = x.powf(nf / (nf - 1.0));
        // p = v²: removes the p^{-1/n}-type endpoint behavior of G₁.
        let inner = |v: f64| -> Complex64 {
            if v <= 0.0 {
                return Complex64::zero();
            }
            let p = v * v;
            match accelerate_point(g, p, spec, &cert) {
                Ok((val, _)) => val * (-p * big_x).exp() * (2.0 * v),
                Err(_) => Complex64::new(f64::NAN, 0.0),
            }
        };
        let vmax = (45.0 / big_x).sqrt();
        let rhs = gauss_panels(inner, 0.0, vmax, 24, 32);
        identity_check.push((x, lhs, rhs));
    }
    Ok(AccelerationResult { g1_samples, kernel_error, identity_check })
}

fn gauss_panels(f: impl Fn(f64) -> Complex64, a: f64, b: f64, panels: usize, order: usize) -> Complex64 {
    let gl = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut s = Complex64::zero();
    for i in 0..panels {
        let lo = a + h * i as f64;
        for (x, w) in gl.nodes.iter().zip(&gl.weights) {
            s += f(lo + 0.5 * h * (x + 1.0)) * (0.5 * h * w);
        }
    }
    s
}

fn integrate_c_inf(f: impl Fn(f64) -> Complex64, scale: f64) -> Complex64 {
    let mut lo = 0.0;
    let mut w = scale;
    let mut total = Complex64::zero();
    for _ in 0..200 {
        let part = integrate_c(&f, lo, lo + w, 1e-12);
        total += part;
        if part.norm() <= 1e-15 * total.norm() && lo > 0.0 {
            break;
        }
        lo += w;
        w *= 1.5;
    }
    total
}

/// Accelerates each single-valued component of a ramified decomposition.
pub fn accelerate_components(
    components: &[&dyn Fn(f64) -> Complex64],
    certificate: Option<GrowthCertificate>,
    p_grid: &[f64],
    spec: &AccelerationSpec,
) -> Result<Vec<AccelerationResult>> {
    components.iter().map(|g| accelerate(*g, certificate, p_grid, &[], spec)).collect()
}

/// Moment ∫₀^∞ K(p,q) q^k dq = k! p^{α(k+1)-1} / Γ(α(k+1)).
pub fn kernel_moment_exact(p: f64, k: u32, n: u32) -> f64 {
    let a = (n as f64 - 1.0) / n as f64;
    let kf = k as f64;
    gamma(kf + 1.0) * p.powf(a * (kf + 1.0) - 1.0) / gamma(a * (kf + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cheb::ChebNodes;
    use crate::grid::RayGrid;
    use num_rational::Rational64;

    fn grid_fn(a: Rational64, n: u32, f: impl Fn(f64) -> f64 + Sync) -> RayGridFunction {
        let g = RayGrid::standard(0.0, 1024, 40.0, a, n).unwrap();
        RayGridFunction::from_fn(g, ChebNodes::new(0, 1.0), |p, _| Complex64::new(f(p.re), 0.0))
    }

    #[test]
    fn laplace_of_one() {
        let f = grid_fn(Rational64::from_integer(0), 1, |_| 1.0);
        let v = laplace_ray(&f, 0, Complex64::new(2.0, 0.0)).unwrap();
        assert!((v.value.re - 0.5).abs() < 1e-10, "{}", v.value);
    }

    #[test]
    fn laplace_of_inverse_sqrt() {
        let f = grid_fn(Rational64::new(-1, 2), 2, |p| p.powf(-0.5) / PI.sqrt());
        let v = laplace_ray(&f, 0, Complex64::new(4.0, 0.0)).unwrap();
        assert!((v.value.re - 0.5).abs() < 1e-9, "{}", v.value);
    }

    #[test]
    fn laplace_rejects_left_half_plane() {
        let f = grid_fn(Rational64::from_integer(0), 1, |_| 1.0);
        assert!(laplace_ray(&f, 0, Complex64::new(-1.0, 0.0)).is_err());
    }

    #[test]
    fn ilt_of_powers() {
        let spec = ContourSpec::default();
        for p in [0.3, 1.0, 3.0] {
            let v = inverse_laplace_contour(|x| 1.0 / x, Complex64::new(p, 0.0), &spec).unwrap();
            assert!((v.value - 1.0).norm() < 1e-8, "{p}: {}", v.value);
            let v = inverse_laplace_contour(|x| x.powf(-0.5), Complex64::new(p, 0.0), &spec).unwrap();
            assert!((v.value.re - p.powf(-0.5) / PI.sqrt()).abs() < 1e-8, "{p}: {}", v.value);
        }
    }

    #[test]
    fn kernel_n2_closed_form_and_contour() {
        let spec = AccelerationSpec::new(2);
        let want = (-0.25f64).exp() / (2.0 * PI.sqrt());
        assert!((kernel_n2(1.0, 1.0) - want).abs() < 1e-15);
        for (p, q) in [(1.0, 1.0), (0.5, 2.0), (3.0, 0.2)] {
            let c = acceleration_kernel_contour(p, q, &spec).unwrap();
            assert!((c - kernel_n2(p, q)).abs() < 1e-9 * kernel_n2(p, q).max(1e-3), "{p},{q}: {c}");
        }
    }
}

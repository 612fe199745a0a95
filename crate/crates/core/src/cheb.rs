//! Chebyshev-Lobatto nodes on [0, T] and barycentric Lagrange interpolation.

use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct ChebNodes {
    pub t_max: f64,
    /// Ascending nodes, t[0] = 0 and t[K] = t_max.
    pub t: Vec<f64>,
    bw: Vec<f64>,
}

impl ChebNodes {
    /// K+1 Lobatto nodes on [0, t_max]; K = 0 gives the single node t_max.
    pub fn new(k: usize, t_max: f64) -> Self {
        if k == 0 {
            return Self { t_max, t: vec![t_max], bw: vec![1.0] };
        }
        let t = (0..=k).map(|j| 0.5 * t_max * (1.0 - (PI * j as f64 / k as f64).cos())).collect();
        let bw = (0..=k)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == k {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        Self { t_max, t, bw }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Values ℓ_j(τ) of every Lagrange basis polynomial.
    pub fn basis(&self, tau: f64) -> Vec<f64> {
        let n = self.t.len();
        if n == 1 {
            return vec![1.0];
        }
        let mut out = vec![0.0; n];
        for (j, &tj) in self.t.iter().enumerate() {
            if (tau - tj).abs() < 1e-15 * self.t_max.max(1.0) {
                out[j] = 1.0;
                return out;
            }
        }
        let mut den = 0.0;
        for j in 0..n {
            let w = self.bw[j] / (tau - self.t[j]);
            out[j] = w;
            den += w;
        }
        for o in &mut out {
            *o /= den;
        }
        out
    }

    pub fn interpolate<T>(&self, values: &[T], tau: f64) -> T
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
    {
        let b = self.basis(tau);
        let mut acc = values[0] * b[0];
        for j in 1..values.len() {
            acc = acc + values[j] * b[j];
        }
        acc
    }

    /// Differentiation matrix D with (D v)_i ≈ v'(t_i).
    pub fn diff_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.t.len();
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            let mut diag = 0.0;
            for j in 0..n {
                if i != j {
                    d[i][j] = (self.bw[j] / self.bw[i]) / (self.t[i] - self.t[j]);
                    diag -= d[i][j];
                }
            }
            d[i][i] = diag;
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_polynomial_exactly() {
        let c = ChebNodes::new(8, 2.0);
        let v: Vec<f64> = c.t.iter().map(|t| t.powi(7) - 3.0 * t).collect();
        let x = 1.2345;
        assert!((c.interpolate(&v, x) - (x.powi(7) - 3.0 * x)).abs() < 1e-11);
        let d = c.diff_matrix();
        let dv: f64 = d[3].iter().zip(&v).map(|(a, b)| a * b).sum();
        let t3 = c.t[3];
        assert!((dv - (7.0 * t3.powi(6) - 3.0)).abs() < 1e-9);
    }
}

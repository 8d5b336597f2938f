use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{invalid, Result};
use crate::grid_paths::InnerProduct;

/// Uniform mesh of `Λ = (0, 1)` with `d` interior nodes `x_i = (i+1)Δx`,
/// `Δx = 1/(d+1)`, and homogeneous Dirichlet values at both ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceGrid {
    d: usize,
}

impl SpaceGrid {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(invalid("space grid needs at least one interior node"));
        }
        Ok(Self { d })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dx(&self) -> f64 {
        1.0 / (self.d + 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.dx()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.d).map(|i| self.node(i))
    }

    /// Measure of `Λ` seen by the lumped quadrature, `d·Δx`.
    pub fn measure(&self) -> f64 {
        self.d as f64 * self.dx()
    }

    /// `K = -Δ_h = tridiag(-1, 2, -1)/Δx²`.
    pub fn stiffness(&self) -> DMatrix<f64> {
        let d = self.d;
        let c = 1.0 / (self.dx() * self.dx());
        DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                2.0 * c
            } else if i.abs_diff(j) == 1 {
                -c
            } else {
                0.0
            }
        })
    }

    /// `k`-th eigenvalue of `K`, `(4/Δx²) sin²(kπΔx/2)`.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let dx = self.dx();
        let s = (k as f64 * PI * dx / 2.0).sin();
        4.0 * s * s / (dx * dx)
    }

    /// `k`-th eigenvector of `K` sampled as `sin(kπx_i)` (not normalized).
    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        self.nodes().map(|x| (k as f64 * PI * x).sin()).collect()
    }

    /// The first `count` eigenvectors of `K`, normalized in `ip`. They are
    /// orthogonal for both the lumped `L²` and the `W^{-1,2}` product.
    pub fn sine_basis(&self, ip: &InnerProduct, count: usize) -> Vec<Vec<f64>> {
        (1..=count.min(self.d))
            .map(|k| {
                let v = self.eigenvector(k);
                let n = ip.norm(&v);
                v.into_iter().map(|x| x / n).collect()
            })
            .collect()
    }

    /// Lumped `L²(Λ)`: `(u, v) = Δx Σ u_i v_i`.
    pub fn l2(&self) -> InnerProduct {
        InnerProduct::lumped(self.d, self.dx()).expect("Δx > 0")
    }

    /// Discrete `W^{-1,2}`: `(u, v) = Δx uᵀK⁻¹v`.
    pub fn h_minus_one(&self) -> InnerProduct {
        InnerProduct::inverse_stiffness(self.dx(), self.stiffness()).expect("Dirichlet stiffness is positive definite")
    }
}

/// Tridiagonal matrix stored by diagonals; `sub[i]` sits at `(i+1, i)` and
/// `sup[i]` at `(i, i+1)`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Tridiagonal {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self {
            sub: vec![0.0; n.saturating_sub(1)],
            diag: vec![0.0; n],
            sup: vec![0.0; n.saturating_sub(1)],
        }
    }

    /// `I - c·self`.
    pub fn shifted_identity(&self, c: f64) -> Self {
        Self {
            sub: self.sub.iter().map(|x| -c * x).collect(),
            diag: self.diag.iter().map(|x| 1.0 - c * x).collect(),
            sup: self.sup.iter().map(|x| -c * x).collect(),
        }
    }

    #[cfg(test)]
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                if i > 0 {
                    acc += self.sub[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    acc += self.sup[i] * x[i + 1];
                }
                acc
            })
            .collect()
    }

    /// Thomas algorithm; `None` on a vanishing or non-finite pivot.
    pub fn solve(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        let n = self.diag.len();
        let mut c = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut pivot = self.diag[0];
        if !pivot.is_finite() || pivot.abs() < 1e-300 {
            return None;
        }
        c[0] = if n > 1 { self.sup[0] / pivot } else { 0.0 };
        y[0] = rhs[0] / pivot;
        for i in 1..n {
            pivot = self.diag[i] - self.sub[i - 1] * c[i - 1];
            if !pivot.is_finite() || pivot.abs() < 1e-300 {
                return None;
            }
            c[i] = if i + 1 < n { self.sup[i] / pivot } else { 0.0 };
            y[i] = (rhs[i] - self.sub[i - 1] * y[i - 1]) / pivot;
        }
        for i in (0..n - 1).rev() {
            y[i] -= c[i] * y[i + 1];
        }
        y.iter().all(|v| v.is_finite()).then_some(y)
    }
}

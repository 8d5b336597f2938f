use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};

/// Discrete inner product on `R^d` realizing the pivot space `H`.
#[derive(Debug, Clone)]
pub enum InnerProduct {
    /// `(u, v) = Σ m_k u_k v_k` with positive mass weights.
    Weighted { weights: Vec<f64> },
    /// `(u, v) = scale · uᵀ K⁻¹ v` for a symmetric positive-definite `K`,
    /// stored through its Cholesky factor `K = L Lᵀ`.
    InverseStiffness {
        scale: f64,
        stiffness: DMatrix<f64>,
        lower: DMatrix<f64>,
        /// Half-bandwidth of `K`, which the Cholesky factor inherits.
        bandwidth: usize,
    },
}

fn forward(lower: &DMatrix<f64>, bw: usize, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut acc = b[i];
        for j in i.saturating_sub(bw)..i {
            acc -= lower[(i, j)] * y[j];
        }
        y[i] = acc / lower[(i, i)];
    }
    y
}

fn backward(lower: &DMatrix<f64>, bw: usize, y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut z = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = y[i];
        for j in i + 1..(i + bw + 1).min(n) {
            acc -= lower[(j, i)] * z[j];
        }
        z[i] = acc / lower[(i, i)];
    }
    z
}

impl InnerProduct {
    pub fn euclidean(dim: usize) -> Self {
        InnerProduct::Weighted {
            weights: vec![1.0; dim],
        }
    }

    /// Constant mass weight `w` on every node, e.g. `Δx` for a lumped `L²`.
    pub fn lumped(dim: usize, w: f64) -> Result<Self> {
        Self::weighted(vec![w; dim])
    }

    pub fn weighted(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(invalid("inner product needs at least one weight"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::NotPositiveDefinite("mass weights must be positive"));
        }
        Ok(InnerProduct::Weighted { weights })
    }

    pub fn inverse_stiffness(scale: f64, stiffness: DMatrix<f64>) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(invalid("inverse-stiffness scale must be positive"));
        }
        if !stiffness.is_square() || stiffness.nrows() == 0 {
            return Err(invalid("stiffness matrix must be square and nonempty"));
        }
        let asym = (&stiffness - stiffness.transpose()).amax();
        if asym > 1e-12 * stiffness.amax().max(1.0) {
            return Err(Error::NotPositiveDefinite("stiffness matrix is not symmetric"));
        }
        let chol = stiffness
            .clone()
            .cholesky()
            .ok_or(Error::NotPositiveDefinite("stiffness matrix has no Cholesky factor"))?;
        let n = stiffness.nrows();
        let mut bandwidth = 0;
        for i in 0..n {
            for j in 0..i {
                if stiffness[(i, j)] != 0.0 {
                    bandwidth = bandwidth.max(i - j);
                }
            }
        }
        Ok(InnerProduct::InverseStiffness {
            scale,
            lower: chol.l(),
            stiffness,
            bandwidth,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            InnerProduct::Weighted { weights } => weights.len(),
            InnerProduct::InverseStiffness { stiffness, .. } => stiffness.nrows(),
        }
    }

    pub fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: d,
                context: "inner product dimension",
            });
        }
        Ok(())
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        match self {
            InnerProduct::Weighted { weights } => weights.iter().zip(u).zip(v).map(|((w, a), b)| w * a * b).sum(),
            InnerProduct::InverseStiffness { .. } => {
                let wu = self.whiten(u);
                let wv = self.whiten(v);
                wu.iter().zip(&wv).map(|(a, b)| a * b).sum()
            }
        }
    }

    pub fn norm_sq(&self, u: &[f64]) -> f64 {
        match self {
            InnerProduct::Weighted { .. } => self.inner(u, u),
            InnerProduct::InverseStiffness { .. } => self.whiten(u).iter().map(|x| x * x).sum(),
        }
    }

    pub fn norm(&self, u: &[f64]) -> f64 {
        self.norm_sq(u).sqrt()
    }

    /// Linear map `W` with `‖u‖_H = |W u|`, so that pairwise distances can be
    /// taken in Euclidean form after a single transform.
    pub fn whiten(&self, u: &[f64]) -> Vec<f64> {
        match self {
            InnerProduct::Weighted { weights } => weights.iter().zip(u).map(|(w, x)| w.sqrt() * x).collect(),
            InnerProduct::InverseStiffness {
                scale,
                lower,
                bandwidth,
                ..
            } => forward(lower, *bandwidth, u)
                .into_iter()
                .map(|x| scale.sqrt() * x)
                .collect(),
        }
    }

    /// Gram matrix applied to `u`: `(u, v)_H = gram_apply(u) · v`.
    pub fn gram_apply(&self, u: &[f64]) -> Vec<f64> {
        match self {
            InnerProduct::Weighted { weights } => weights.iter().zip(u).map(|(w, x)| w * x).collect(),
            InnerProduct::InverseStiffness {
                scale,
                lower,
                bandwidth,
                ..
            } => {
                let y = forward(lower, *bandwidth, u);
                backward(lower, *bandwidth, &y).into_iter().map(|x| scale * x).collect()
            }
        }
    }

    /// Inverse of [`gram_apply`](Self::gram_apply): the Riesz representative
    /// of a load vector.
    pub fn riesz(&self, load: &[f64]) -> Vec<f64> {
        match self {
            InnerProduct::Weighted { weights } => weights.iter().zip(load).map(|(w, x)| x / w).collect(),
            InnerProduct::InverseStiffness {
                scale,
                stiffness,
                bandwidth,
                ..
            } => {
                let n = load.len();
                (0..n)
                    .map(|i| {
                        let lo = i.saturating_sub(*bandwidth);
                        let hi = (i + bandwidth + 1).min(n);
                        (lo..hi).map(|j| stiffness[(i, j)] * load[j]).sum::<f64>() / scale
                    })
                    .collect()
            }
        }
    }

    /// Orthonormality check: largest deviation of the Gram matrix of `basis`
    /// from the identity.
    pub fn orthonormality_defect(&self, basis: &[Vec<f64>]) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.inner(a, b) - target).abs());
            }
        }
        worst
    }
}

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::{num_complex::Complex, Fft, FftPlanner};

use super::{InnerProduct, SampledPath, TimeGrid};
use crate::error::{invalid, Error, Result};
use crate::rng;

/// `E[B_s B_t]` for standard fBm with Hurst index `h`.
pub fn fbm_covariance(h: f64, s: f64, t: f64) -> f64 {
    0.5 * (s.abs().powf(2.0 * h) + t.abs().powf(2.0 * h) - (t - s).abs().powf(2.0 * h))
}

/// Autocovariance of unit-spaced fractional Gaussian noise at lag `k`.
fn fgn_autocov(h: f64, k: usize) -> f64 {
    let k = k as f64;
    let e = 2.0 * h;
    0.5 * ((k + 1.0).powf(e) - 2.0 * k.powf(e) + (k - 1.0).abs().powf(e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FbmMethod {
    CirculantEmbedding,
    Cholesky,
}

enum Plan {
    Circulant { sqrt_eig: Vec<f64>, fft: Arc<dyn Fft<f64>> },
    Cholesky { lower: DMatrix<f64> },
}

/// Exact-covariance fBm sampler for a fixed grid and Hurst index. Build once,
/// sample many seeds.
pub struct FbmSampler {
    grid: TimeGrid,
    hurst: f64,
    plan: Plan,
}

impl std::fmt::Debug for FbmSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FbmSampler")
            .field("grid", &self.grid)
            .field("hurst", &self.hurst)
            .field("method", &self.method())
            .finish()
    }
}

fn check_hurst(h: f64) -> Result<()> {
    if !(h > 0.0 && h < 1.0) {
        return Err(invalid(format!("Hurst in (0,1) required, got {h}")));
    }
    Ok(())
}

impl FbmSampler {
    /// Circulant embedding, falling back to Cholesky when the embedding is
    /// not nonnegative definite.
    pub fn new(hurst: f64, grid: TimeGrid) -> Result<Self> {
        check_hurst(hurst)?;
        match Self::circulant(hurst, grid) {
            Some(plan) => Ok(Self { grid, hurst, plan }),
            None => Self::with_method(hurst, grid, FbmMethod::Cholesky),
        }
    }

    pub fn with_method(hurst: f64, grid: TimeGrid, method: FbmMethod) -> Result<Self> {
        check_hurst(hurst)?;
        let plan = match method {
            FbmMethod::CirculantEmbedding => Self::circulant(hurst, grid).ok_or(Error::NotPositiveDefinite(
                "circulant embedding has negative eigenvalues",
            ))?,
            FbmMethod::Cholesky => {
                let n = grid.n();
                let cov = DMatrix::from_fn(n, n, |i, j| fgn_autocov(hurst, i.abs_diff(j)));
                let chol = cov
                    .cholesky()
                    .ok_or(Error::NotPositiveDefinite("fGn covariance has no Cholesky factor"))?;
                Plan::Cholesky { lower: chol.l() }
            }
        };
        Ok(Self { grid, hurst, plan })
    }

    fn circulant(hurst: f64, grid: TimeGrid) -> Option<Plan> {
        let n = grid.n();
        let m = 2 * n;
        let mut c: Vec<Complex<f64>> = (0..m)
            .map(|j| {
                let lag = if j <= n { j } else { m - j };
                Complex::new(fgn_autocov(hurst, lag), 0.0)
            })
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(m);
        fft.process(&mut c);
        let max = c.iter().fold(0.0f64, |a, z| a.max(z.re));
        let mut sqrt_eig = Vec::with_capacity(m);
        for z in &c {
            if z.re < -1e-10 * max.max(1.0) {
                return None;
            }
            sqrt_eig.push((z.re.max(0.0) / m as f64).sqrt());
        }
        Some(Plan::Circulant { sqrt_eig, fft })
    }

    pub fn method(&self) -> FbmMethod {
        match self.plan {
            Plan::Circulant { .. } => FbmMethod::CirculantEmbedding,
            Plan::Cholesky { .. } => FbmMethod::Cholesky,
        }
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Unit-spaced fGn draws, `n` of them.
    fn unit_increments<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.grid.n();
        match &self.plan {
            Plan::Circulant { sqrt_eig, fft } => {
                let mut w: Vec<Complex<f64>> = sqrt_eig
                    .iter()
                    .map(|s| {
                        let a: f64 = rng.sample(StandardNormal);
                        let b: f64 = rng.sample(StandardNormal);
                        Complex::new(s * a, s * b)
                    })
                    .collect();
                fft.process(&mut w);
                w.iter().take(n).map(|z| z.re).collect()
            }
            Plan::Cholesky { lower } => {
                let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
                (lower * z).iter().copied().collect()
            }
        }
    }

    /// Scalar path with `B_{t0} = 0`, driven by `rng`.
    pub fn sample_with<R: Rng>(&self, rng: &mut R) -> SampledPath {
        let scale = self.grid.dt().powf(self.hurst);
        let inc = self.unit_increments(rng);
        let mut values = Vec::with_capacity(self.grid.len());
        let mut acc = 0.0;
        values.push(0.0);
        for x in inc {
            acc += scale * x;
            values.push(acc);
        }
        SampledPath::scalar(self.grid, values).expect("finite fBm samples")
    }

    pub fn sample(&self, seed: u64) -> SampledPath {
        self.sample_with(&mut rng::stream(seed))
    }
}

/// One scalar fBm path on `grid`, deterministic in `seed`.
pub fn generate_fbm(seed: u64, hurst: f64, grid: TimeGrid) -> Result<SampledPath> {
    Ok(FbmSampler::new(hurst, grid)?.sample(seed))
}

/// Hurst index together with a finite list of coloring coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct HurstSpec {
    hurst: f64,
    coloring: Vec<f64>,
}

impl HurstSpec {
    pub fn new(hurst: f64, coloring: Vec<f64>) -> Result<Self> {
        check_hurst(hurst)?;
        if coloring.iter().any(|c| !c.is_finite()) {
            return Err(invalid("coloring coefficients must be finite"));
        }
        Ok(Self { hurst, coloring })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn coloring(&self) -> &[f64] {
        &self.coloring
    }

    /// `Σ λ_k²`, the variance of the colored noise at time 1.
    pub fn trace(&self) -> f64 {
        self.coloring.iter().map(|c| c * c).sum()
    }
}

/// `W_t = Σ_k λ_k e_k β^k_t` with independent scalar fBms `β^k`. Mode `k` uses
/// the sub-seed `derive_seed(seed, k)`.
pub fn generate_colored_fbm(
    seed: u64,
    spec: &HurstSpec,
    grid: TimeGrid,
    basis: &[Vec<f64>],
    ip: &InnerProduct,
) -> Result<SampledPath> {
    if basis.len() != spec.coloring.len() {
        return Err(Error::DimensionMismatch {
            expected: spec.coloring.len(),
            actual: basis.len(),
            context: "coloring coefficients vs basis vectors",
        });
    }
    let dim = ip.dim();
    for e in basis {
        ip.check_dim(e.len())?;
    }
    let defect = ip.orthonormality_defect(basis);
    if defect > 1e-8 {
        return Err(invalid(format!("basis is not H-orthonormal (defect {defect:.3e})")));
    }
    let mut data = vec![0.0; grid.len() * dim];
    if basis.is_empty() {
        return SampledPath::new(grid, dim, data);
    }
    let sampler = FbmSampler::new(spec.hurst, grid)?;
    for (k, (lambda, e)) in spec.coloring.iter().zip(basis).enumerate() {
        if *lambda == 0.0 {
            continue;
        }
        let beta = sampler.sample(rng::derive_seed(seed, k as u64));
        for (row, b) in data.chunks_exact_mut(dim).zip(beta.data()) {
            for (x, ek) in row.iter_mut().zip(e) {
                *x += lambda * b * ek;
            }
        }
    }
    SampledPath::new(grid, dim, data)
}

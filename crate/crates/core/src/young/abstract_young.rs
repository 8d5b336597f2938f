use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use super::pairing::check_same_grid;
use crate::error::{invalid, Error, Result};
use crate::grid_paths::{InnerProduct, PathIntegrator, SampledPath};
use crate::rng;
use crate::sewing::{sew_with, Germ, SewOptions, SewingResult};

type VecMap = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

/// Nemytskii-type map `σ: H → H` with declared linear-growth constant `C`
/// and Lipschitz constant `L`.
#[derive(Clone)]
pub struct NemytskiiMap {
    f: Arc<VecMap>,
    growth: f64,
    lipschitz: f64,
}

impl std::fmt::Debug for NemytskiiMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NemytskiiMap")
            .field("growth", &self.growth)
            .field("lipschitz", &self.lipschitz)
            .finish_non_exhaustive()
    }
}

/// Outcome of random spot checks of the declared constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NemytskiiAudit {
    /// Largest `‖σ(u)‖ / (C(1 + ‖u‖))` seen.
    pub worst_growth_ratio: f64,
    /// Largest `‖σ(u) - σ(v)‖ / (L‖u - v‖)` seen.
    pub worst_lipschitz_ratio: f64,
}

impl NemytskiiAudit {
    pub fn passed(&self) -> bool {
        self.worst_growth_ratio <= 1.0 + 1e-12 && self.worst_lipschitz_ratio <= 1.0 + 1e-12
    }
}

impl NemytskiiMap {
    pub fn new(growth: f64, lipschitz: f64, f: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        Self {
            f: Arc::new(f),
            growth,
            lipschitz,
        }
    }

    /// Componentwise `g`; on a weighted `ℓ²` the constants of `g` carry over.
    pub fn pointwise(growth: f64, lipschitz: f64, g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(growth, lipschitz, move |u, out| {
            for (o, x) in out.iter_mut().zip(u) {
                *o = g(*x);
            }
        })
    }

    pub fn identity() -> Self {
        Self::new(1.0, 1.0, |u, out| out.copy_from_slice(u))
    }

    /// `σ ≡ c`; growth constant `‖c‖` must be supplied by the caller.
    pub fn constant(value: Vec<f64>, growth: f64) -> Self {
        Self::new(growth, 0.0, move |_, out| out.copy_from_slice(&value))
    }

    pub fn growth(&self) -> f64 {
        self.growth
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        (self.f)(u, out)
    }

    /// `σ ∘ u` at every node.
    pub fn apply_path(&self, u: &SampledPath) -> Result<SampledPath> {
        u.map(u.dim(), |_, row, out| self.apply(row, out))
    }

    /// Checks both declared constants on `samples` random pairs of Gaussian
    /// vectors with scale `scale`.
    pub fn spot_check(&self, ip: &InnerProduct, samples: usize, scale: f64, seed: u64) -> NemytskiiAudit {
        let mut rng = rng::stream(seed);
        let d = ip.dim();
        let mut draw = || -> Vec<f64> { (0..d).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect() };
        let mut worst_growth_ratio: f64 = 0.0;
        let mut worst_lipschitz_ratio: f64 = 0.0;
        let mut su = vec![0.0; d];
        let mut sv = vec![0.0; d];
        for _ in 0..samples {
            let u = draw();
            let v = draw();
            self.apply(&u, &mut su);
            self.apply(&v, &mut sv);
            let g = ip.norm(&su) / (self.growth * (1.0 + ip.norm(&u)));
            worst_growth_ratio = worst_growth_ratio.max(if g.is_nan() { 0.0 } else { g });
            let diff: Vec<f64> = su.iter().zip(&sv).map(|(a, b)| a - b).collect();
            let du: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - b).collect();
            let num = ip.norm(&diff);
            let l = if num == 0.0 {
                0.0
            } else {
                num / (self.lipschitz * ip.norm(&du))
            };
            worst_lipschitz_ratio = worst_lipschitz_ratio.max(l);
        }
        NemytskiiAudit {
            worst_growth_ratio,
            worst_lipschitz_ratio,
        }
    }
}

/// Bilinear product `H × E → H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultiplierProduct {
    /// `E = ℝ`: `h·e = e₀ h`.
    Scalar,
    /// `E = R^d` with the max norm: `(h·e)_k = h_k e_k`.
    Pointwise,
}

impl MultiplierProduct {
    pub fn e_dim(&self, h_dim: usize) -> usize {
        match self {
            MultiplierProduct::Scalar => 1,
            MultiplierProduct::Pointwise => h_dim,
        }
    }

    /// Bound `‖h·e‖_H ≤ C‖h‖_H‖e‖_E` for weighted-`ℓ²` inner products.
    pub fn constant(&self) -> f64 {
        1.0
    }

    pub fn e_norm(&self, e: &[f64]) -> f64 {
        e.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn apply(&self, h: &[f64], e: &[f64], out: &mut [f64]) {
        match self {
            MultiplierProduct::Scalar => {
                for (o, x) in out.iter_mut().zip(h) {
                    *o = e[0] * x;
                }
            }
            MultiplierProduct::Pointwise => {
                for ((o, x), y) in out.iter_mut().zip(h).zip(e) {
                    *o = x * y;
                }
            }
        }
    }

    /// Largest ratio `‖h·e‖_H / (C‖h‖_H‖e‖_E)` and largest bilinearity defect
    /// over random triples.
    pub fn spot_check(&self, ip: &InnerProduct, samples: usize, seed: u64) -> (f64, f64) {
        let mut rng = rng::stream(seed);
        let d = ip.dim();
        let de = self.e_dim(d);
        let mut gauss = |m: usize| -> Vec<f64> { (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect() };
        let mut worst_bound: f64 = 0.0;
        let mut worst_linear: f64 = 0.0;
        let mut out = vec![0.0; d];
        let mut o1 = vec![0.0; d];
        let mut o2 = vec![0.0; d];
        for _ in 0..samples {
            let (h1, h2, e) = (gauss(d), gauss(d), gauss(de));
            let a = 1.7;
            self.apply(&h1, &e, &mut out);
            let denom = self.constant() * ip.norm(&h1) * self.e_norm(&e);
            worst_bound = worst_bound.max(ip.norm(&out) / denom);
            let comb: Vec<f64> = h1.iter().zip(&h2).map(|(x, y)| a * x + y).collect();
            self.apply(&comb, &e, &mut out);
            self.apply(&h1, &e, &mut o1);
            self.apply(&h2, &e, &mut o2);
            for ((x, y), z) in out.iter().zip(&o1).zip(&o2) {
                worst_linear = worst_linear.max((x - (a * y + z)).abs());
            }
        }
        (worst_bound, worst_linear)
    }
}

/// `G_{s,t} = ⟨σ(u)⟩_{s,t} · (X_t - X_s)` with `σ ∘ u` sampled at the nodes
/// and averaged exactly over its piecewise-linear interpolant.
#[derive(Debug, Clone)]
pub struct AveragedGerm {
    avg: PathIntegrator,
    x: SampledPath,
    prod: MultiplierProduct,
    alpha: f64,
    gamma: f64,
}

impl AveragedGerm {
    pub fn new(
        sigma: &NemytskiiMap,
        u: &SampledPath,
        x: &SampledPath,
        prod: MultiplierProduct,
        alpha: f64,
        gamma: f64,
    ) -> Result<Self> {
        check_same_grid(u, x)?;
        if x.dim() != prod.e_dim(u.dim()) {
            return Err(Error::DimensionMismatch {
                expected: prod.e_dim(u.dim()),
                actual: x.dim(),
                context: "multiplier E-dimension",
            });
        }
        let su = sigma.apply_path(u)?;
        Ok(Self {
            avg: PathIntegrator::new(&su),
            x: x.clone(),
            prod,
            alpha,
            gamma,
        })
    }
}

impl Germ for AveragedGerm {
    fn dim(&self) -> usize {
        self.avg.path().dim()
    }

    fn eval(&self, s: f64, t: f64, out: &mut [f64]) {
        let d = self.dim();
        let de = self.x.dim();
        let mut mean = vec![0.0; d];
        self.avg.average_into(s, t, &mut mean);
        let mut xs = vec![0.0; de];
        let mut xt = vec![0.0; de];
        self.x.eval_into(s, &mut xs);
        self.x.eval_into(t, &mut xt);
        for (b, a) in xt.iter_mut().zip(&xs) {
            *b -= a;
        }
        self.prod.apply(&mean, &xt, out);
    }

    fn declared_alpha(&self) -> f64 {
        self.alpha
    }

    fn declared_gamma(&self) -> f64 {
        self.gamma
    }
}

/// `I(u) = ∫ σ(u) dX`, the sewing of [`AveragedGerm`] for `X ∈ C^γ E` and
/// `u ∈ B^{1/2}_{2,∞}H`. Needs `γ + 1/q > 1`.
pub fn abstract_young(
    sigma: &NemytskiiMap,
    u: &SampledPath,
    x: &SampledPath,
    prod: MultiplierProduct,
    q: f64,
    gamma: f64,
    opts: SewOptions,
) -> Result<SewingResult> {
    if !(q >= 1.0) {
        return Err(invalid(format!("q must be at least 1, got {q}")));
    }
    if !(gamma + 1.0 / q > 1.0) {
        return Err(Error::YoungIneligible(format!(
            "γ + 1/q = {} must exceed 1",
            gamma + 1.0 / q
        )));
    }
    let germ = AveragedGerm::new(sigma, u, x, prod, gamma, gamma + 0.5)?;
    sew_with(&germ, u.grid(), opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_paths::TimeGrid;

    #[test]
    fn constant_sigma_returns_pinned_driver() {
        let g = TimeGrid::unit(128).unwrap();
        let u = SampledPath::scalar_fn(g, |t| (9.0 * t).sin()).unwrap();
        let x = SampledPath::scalar_fn(g, |t| t.sqrt()).unwrap();
        let sigma = NemytskiiMap::constant(vec![1.0], 1.0);
        let r = abstract_young(
            &sigma,
            &u,
            &x,
            MultiplierProduct::Scalar,
            4.0,
            0.8,
            SewOptions::default(),
        )
        .unwrap();
        let pinned = x.pinned();
        for (a, b) in r.sewn.data().iter().zip(pinned.data()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn eligibility_error_message() {
        let g = TimeGrid::unit(8).unwrap();
        let u = SampledPath::zeros(g, 1);
        let err = abstract_young(
            &NemytskiiMap::identity(),
            &u,
            &u,
            MultiplierProduct::Scalar,
            2.0,
            0.5,
            SewOptions::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("outside Young-eligibility"));
    }

    #[test]
    fn sine_is_one_lipschitz() {
        let ip = InnerProduct::lumped(16, 1.0 / 17.0).unwrap();
        let sigma = NemytskiiMap::pointwise(1.0, 1.0, f64::sin);
        assert!(sigma.spot_check(&ip, 200, 2.0, 11).passed());
        let (bound, lin) = MultiplierProduct::Pointwise.spot_check(&ip, 200, 3);
        assert!(bound <= 1.0 + 1e-12);
        assert!(lin < 1e-12);
    }
}

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;

use super::{LocalTimeField, SpatialBins};
use crate::error::{invalid, Error, Result};
use crate::grid_paths::{besov_seminorm, linf_norm, BesovIndex, InnerProduct, PathIntegrator, SampledPath};
use crate::rng;
use crate::sewing::{sew_with, Germ, SewOptions, SewingResult};

type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;

/// Scalar drift `b` with a constant `C` such that `|b(x)| ≤ C(1 + |x|)` and
/// `|b(x) - b(y)| ≤ C|x - y|`, plus the mollification parameter when `b` is a
/// smoothed singular drift.
#[derive(Clone)]
pub struct DriftSpec {
    b: Arc<ScalarFn>,
    constant: f64,
    eps: Option<f64>,
}

impl std::fmt::Debug for DriftSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DriftSpec")
            .field("constant", &self.constant)
            .field("eps", &self.eps)
            .finish_non_exhaustive()
    }
}

impl DriftSpec {
    pub fn new(constant: f64, b: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            b: Arc::new(b),
            constant,
            eps: None,
        }
    }

    pub fn zero() -> Self {
        Self::new(0.0, |_| 0.0)
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = Some(eps);
        self
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.b)(x)
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn eps(&self) -> Option<f64> {
        self.eps
    }

    pub fn as_fn(&self) -> &(dyn Fn(f64) -> f64 + Sync) {
        &*self.b
    }

    /// Largest growth and Lipschitz ratios against `C` over `samples` random
    /// points in `[-radius, radius]`; both must be at most 1.
    pub fn spot_check(&self, samples: usize, radius: f64, seed: u64) -> (f64, f64) {
        let mut rng = rng::stream(seed);
        let mut growth: f64 = 0.0;
        let mut lip: f64 = 0.0;
        for _ in 0..samples {
            let x = rng.random_range(-radius..=radius);
            let y = rng.random_range(-radius..=radius);
            let bx = self.eval(x);
            let g = if bx == 0.0 {
                0.0
            } else {
                bx.abs() / (self.constant * (1.0 + x.abs()))
            };
            growth = growth.max(g);
            let d = (bx - self.eval(y)).abs();
            let l = if d == 0.0 {
                0.0
            } else {
                d / (self.constant * (x - y).abs())
            };
            lip = lip.max(l);
        }
        (growth, lip)
    }
}

/// Gaussian `b_ε(x) = (2πε²)^{-1/2} exp(-x²/2ε²)` with
/// `C_ε = sup|b_ε'| + sup b_ε = b_ε(0)(1 + 1/(ε√e))`.
pub fn mollified_delta(eps: f64) -> Result<DriftSpec> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(invalid(format!("mollification must be positive, got {eps}")));
    }
    let peak = 1.0 / (2.0 * PI * eps * eps).sqrt();
    let constant = peak / (eps * std::f64::consts::E.sqrt()) + peak;
    Ok(DriftSpec::new(constant, move |x| peak * (-x * x / (2.0 * eps * eps)).exp()).with_eps(eps))
}

/// `u ↦ (b ∗ L_{s,t})(u)` tabulated on the bin centers and linearly
/// interpolated between them.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolvedMap {
    z0: f64,
    spacing: f64,
    values: Vec<f64>,
}

impl ConvolvedMap {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |j| self.z0 + j as f64 * self.spacing)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.z0, self.z0 + (self.values.len() - 1) as f64 * self.spacing)
    }

    pub fn eval(&self, u: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        if !(u >= lo && u <= hi) {
            return Err(Error::OutsideRange { query: u, lo, hi });
        }
        if self.values.len() == 1 {
            return Ok(self.values[0]);
        }
        let x = (u - self.z0) / self.spacing;
        let j = (x.floor() as usize).min(self.values.len() - 2);
        let th = x - j as f64;
        Ok(self.values[j] + th * (self.values[j + 1] - self.values[j]))
    }
}

/// Nonzero entries of `L_{s,t}` as `(center, mass·width)` pairs.
fn weighted_support(field: &LocalTimeField, s: usize, t: usize) -> Vec<(f64, f64)> {
    let bins = field.bins();
    field
        .increment(s, t)
        .into_iter()
        .enumerate()
        .filter(|(_, v)| *v > 0.0)
        .map(|(k, v)| (bins.center(k), bins.width() * v))
        .collect()
}

/// `width · Σ_k b(z_j - z_k) L_{s,t}[k]` at every bin center `z_j`.
pub fn convolve_local_time(drift: &DriftSpec, field: &LocalTimeField, s: usize, t: usize) -> Result<ConvolvedMap> {
    if s >= t || t > field.grid().n() {
        return Err(invalid(format!("convolution window needs s < t ≤ n, got [{s}, {t}]")));
    }
    let bins = field.bins();
    let support = weighted_support(field, s, t);
    let values = bins
        .centers()
        .map(|u| support.iter().map(|(z, w)| w * drift.eval(u - z)).sum())
        .collect();
    Ok(ConvolvedMap {
        z0: bins.center(0),
        spacing: bins.width(),
        values,
    })
}

/// Estimate of `‖b ∗ L‖_{C^γ(C^{0,1})}`: over dyadic lags and disjoint windows,
/// `(sup_u |F_{s,t}(u)| + Lip F_{s,t}) / |t - s|^γ` with `F_{s,t} = b ∗ L_{s,t}`
/// sampled on (at most 128) bin centers.
pub fn convolution_regularity(drift: &DriftSpec, field: &LocalTimeField, gamma: f64) -> f64 {
    let grid = field.grid();
    let bins = field.bins();
    let n = grid.n();
    let stride = (bins.m() / 128).max(1);
    let probes: Vec<f64> = (0..bins.m()).step_by(stride).map(|k| bins.center(k)).collect();
    let spacing = stride as f64 * bins.width();
    let mut lags = Vec::new();
    let mut k = 1;
    while k <= n {
        lags.push(k);
        k *= 2;
    }
    let per_lag = crate::par::map_range(lags.len(), |li| {
        let k = lags[li];
        let mut worst: f64 = 0.0;
        let mut r = 0;
        while r + k <= n {
            let support = weighted_support(field, r, r + k);
            let vals: Vec<f64> = probes
                .iter()
                .map(|u| support.iter().map(|(z, w)| w * drift.eval(u - z)).sum())
                .collect();
            let sup = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let lip = vals
                .windows(2)
                .fold(0.0f64, |m, w| m.max((w[1] - w[0]).abs() / spacing));
            worst = worst.max((sup + lip) / (k as f64 * grid.dt()).powf(gamma));
            r += k;
        }
        worst
    });
    crate::par::max_of(&per_lag)
}

/// `G_{s,t}(x) = (b ∗ L_{s,t})(⟨u(x)⟩_{s,t})` for every spatial node `x`,
/// with `L` piecewise linear in time. Equivalently
/// `Σ_j |[s,t] ∩ [t_j, t_{j+1}]|·b(⟨u(x)⟩_{s,t} - z_{c_j})` where `c_j` is
/// the bin visited on cell `j`. The left-point variant uses `u_s`.
#[derive(Debug, Clone)]
pub struct DriftGerm {
    drift: DriftSpec,
    field: LocalTimeField,
    u: PathIntegrator,
    averaged: bool,
    gamma: f64,
}

impl DriftGerm {
    pub fn new(drift: &DriftSpec, field: &LocalTimeField, u: &SampledPath, averaged: bool, gamma: f64) -> Result<Self> {
        if u.grid() != field.grid() {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", u.grid(), field.grid())));
        }
        Ok(Self {
            drift: drift.clone(),
            field: field.clone(),
            u: PathIntegrator::new(u),
            averaged,
            gamma,
        })
    }
}

impl Germ for DriftGerm {
    fn dim(&self) -> usize {
        self.u.path().dim()
    }

    fn eval(&self, s: f64, t: f64, out: &mut [f64]) {
        let grid = self.field.grid();
        let mut ubar = vec![0.0; self.dim()];
        if self.averaged {
            self.u.average_into(s, t, &mut ubar);
        } else {
            self.u.path().eval_into(s, &mut ubar);
        }
        out.fill(0.0);
        let (js, _) = grid.locate(s);
        let (jt, tt) = grid.locate(t);
        let last = if tt == 0.0 && jt > js { jt - 1 } else { jt };
        for j in js..=last {
            let overlap = t.min(grid.node(j + 1)) - s.max(grid.node(j));
            if overlap <= 0.0 {
                continue;
            }
            let z = self.field.bins().center(self.field.cell_bin(j));
            for (o, x) in out.iter_mut().zip(&ubar) {
                *o += overlap * self.drift.eval(x - z);
            }
        }
    }

    fn declared_alpha(&self) -> f64 {
        self.gamma
    }

    fn declared_gamma(&self) -> f64 {
        self.gamma + 0.5
    }
}

#[derive(Debug, Clone)]
pub struct DriftIntegralReport {
    pub sewing: SewingResult,
    /// `⟦I(u)⟧_{B^γ_{q,∞}}`.
    pub seminorm: f64,
    /// Estimate of `‖b ∗ L^w‖_{C^γ(C^{0,1})}`.
    pub regularity: f64,
    /// `regularity · (1 + ‖u‖_∞ + ⟦u⟧_{B^{1/2}_{2,∞}})`.
    pub rhs: f64,
    /// `seminorm / rhs`.
    pub realized_constant: f64,
}

/// Sewing of [`DriftGerm`] (averaged form) for `u` on spatial nodes; needs
/// `γ + 1/q > 1`.
#[allow(clippy::too_many_arguments)]
pub fn regularized_drift_integral(
    drift: &DriftSpec,
    w: &SampledPath,
    u: &SampledPath,
    bins: SpatialBins,
    q: f64,
    gamma: f64,
    ip: &InnerProduct,
    opts: SewOptions,
) -> Result<DriftIntegralReport> {
    if !(q >= 1.0) {
        return Err(invalid(format!("q must be at least 1, got {q}")));
    }
    if !(gamma + 1.0 / q > 1.0) || !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::YoungIneligible(format!(
            "need γ ∈ (0,1] and γ + 1/q > 1, got γ={gamma}, q={q}"
        )));
    }
    let field = super::local_time(w, bins)?;
    let germ = DriftGerm::new(drift, &field, u, true, gamma)?;
    let sewing = sew_with(&germ, u.grid(), opts)?;
    let seminorm = besov_seminorm(&sewing.sewn, BesovIndex::new(gamma, q)?, ip)?;
    let regularity = convolution_regularity(drift, &field, gamma);
    let rhs = regularity * (1.0 + linf_norm(u, ip)? + besov_seminorm(u, BesovIndex::new(0.5, 2.0)?, ip)?);
    let realized_constant = if rhs > 0.0 {
        seminorm / rhs
    } else if seminorm == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(DriftIntegralReport {
        sewing,
        seminorm,
        regularity,
        rhs,
        realized_constant,
    })
}

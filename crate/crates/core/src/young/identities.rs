use std::sync::Arc;

use super::pairing::{check_same_grid, pair_sew};
use crate::error::{Error, Result};
use crate::grid_paths::{besov_seminorm, linf_norm, BesovIndex, InnerProduct, SampledPath};
use crate::sewing::SewOptions;

fn cumulative_trapezoid(values: &[f64], dt: f64) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    for k in 1..values.len() {
        out[k] = out[k - 1] + 0.5 * dt * (values[k - 1] + values[k]);
    }
    out
}

/// Residual of `‖X_t‖² = ‖X_0‖² + 2∫_0^t ⟨Y, X⟩ ds + 2𝓢_t(X, dI)`, with the
/// time integral by the trapezoid rule and `𝓢` sewn with `δA`-exponent
/// `gamma`.
#[allow(clippy::too_many_arguments)]
pub fn energy_identity_residual(
    x0: &[f64],
    y: &SampledPath,
    i: &SampledPath,
    x: &SampledPath,
    ip: &InnerProduct,
    pairing: &(dyn Fn(&[f64], &[f64]) -> f64 + Sync),
    gamma: f64,
    opts: SewOptions,
) -> Result<SampledPath> {
    check_same_grid(x, y)?;
    check_same_grid(x, i)?;
    ip.check_dim(x0.len())?;
    let grid = *x.grid();
    let duality: Vec<f64> = (0..grid.len()).map(|k| pairing(y.row(k), x.row(k))).collect();
    let drift = cumulative_trapezoid(&duality, grid.dt());
    let s = pair_sew(x, i, ip, gamma, opts)?.integral;
    let start = ip.norm_sq(x0);
    let res: Vec<f64> = (0..grid.len())
        .map(|k| ip.norm_sq(x.row(k)) - start - 2.0 * drift[k] - 2.0 * s.row(k)[0])
        .collect();
    SampledPath::scalar(grid, res)
}

type ScalarField = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// Scalar `F(t, y)` with its partial derivatives.
#[derive(Clone)]
pub struct ChainRuleMap {
    f: Arc<ScalarField>,
    dt_f: Arc<ScalarField>,
    dy_f: Arc<ScalarField>,
}

impl std::fmt::Debug for ChainRuleMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChainRuleMap").finish_non_exhaustive()
    }
}

impl ChainRuleMap {
    pub fn new(
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        dt_f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        dy_f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            f: Arc::new(f),
            dt_f: Arc::new(dt_f),
            dy_f: Arc::new(dy_f),
        }
    }

    /// `F(t, y) = y`.
    pub fn identity() -> Self {
        Self::new(|_, y| y, |_, _| 0.0, |_, _| 1.0)
    }

    /// `F(t, y) = e^{-λt} y`.
    pub fn exp_weight(lambda: f64) -> Self {
        Self::new(
            move |t, y| (-lambda * t).exp() * y,
            move |t, y| -lambda * (-lambda * t).exp() * y,
            move |t, _| (-lambda * t).exp(),
        )
    }

    pub fn eval(&self, t: f64, y: f64) -> f64 {
        (self.f)(t, y)
    }
}

#[derive(Debug, Clone)]
pub struct ChainRuleReport {
    /// `F(t,y_t) - F(0,y_0) - ∫∂_tF - ∫∂_yF b - 𝓢_t(∂_yF(y)u, dI)`.
    pub residual: SampledPath,
    /// `y_t = y_0 + ∫_0^t b + 𝓢_t(u, dI)`.
    pub y: SampledPath,
    /// Range of `y` on which `F` and its derivatives were evaluated; local
    /// bounds on `F` are only meaningful there.
    pub y_range: (f64, f64),
    pub max_abs_residual: f64,
}

/// Chain rule residual for `y_t = y_0 + ∫ b + 𝓢(u, dI)` transformed by `F`.
#[allow(clippy::too_many_arguments)]
pub fn chain_rule_residual(
    f: &ChainRuleMap,
    y0: f64,
    b: &SampledPath,
    u: &SampledPath,
    i: &SampledPath,
    ip: &InnerProduct,
    gamma: f64,
    opts: SewOptions,
) -> Result<ChainRuleReport> {
    check_same_grid(b, u)?;
    check_same_grid(b, i)?;
    if b.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            actual: b.dim(),
            context: "chain-rule drift must be scalar",
        });
    }
    let grid = *b.grid();
    let dt = grid.dt();
    let bv = b.component(0);
    let drift = cumulative_trapezoid(&bv, dt);
    let s = pair_sew(u, i, ip, gamma, opts)?.integral;
    let yv: Vec<f64> = (0..grid.len()).map(|k| y0 + drift[k] + s.row(k)[0]).collect();
    let times: Vec<f64> = grid.nodes().collect();
    let dtf: Vec<f64> = times.iter().zip(&yv).map(|(t, y)| (f.dt_f)(*t, *y)).collect();
    let dyf_b: Vec<f64> = times
        .iter()
        .zip(&yv)
        .zip(&bv)
        .map(|((t, y), bb)| (f.dy_f)(*t, *y) * bb)
        .collect();
    let weighted = u.map(u.dim(), |t, row, out| {
        let k = ((t - grid.t0()) / dt).round() as usize;
        let w = (f.dy_f)(t, yv[k.min(grid.n())]);
        for (o, x) in out.iter_mut().zip(row) {
            *o = w * x;
        }
    })?;
    let sw = pair_sew(&weighted, i, ip, gamma, opts)?.integral;
    let int_dt = cumulative_trapezoid(&dtf, dt);
    let int_dy = cumulative_trapezoid(&dyf_b, dt);
    let f0 = f.eval(times[0], y0);
    let res: Vec<f64> = (0..grid.len())
        .map(|k| f.eval(times[k], yv[k]) - f0 - int_dt[k] - int_dy[k] - sw.row(k)[0])
        .collect();
    let y_range = yv.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), y| {
        (lo.min(*y), hi.max(*y))
    });
    let residual = SampledPath::scalar(grid, res)?;
    Ok(ChainRuleReport {
        max_abs_residual: residual.max_abs(),
        residual,
        y: SampledPath::scalar(grid, yv)?,
        y_range,
    })
}

#[derive(Debug, Clone)]
pub struct WeightedBoundReport {
    /// `J_t = ∫_0^t e^{λ(t-s)} (∂_s I_s, u_s)_H ds`.
    pub path: SampledPath,
    /// `sup_t |J_t|`.
    pub value: f64,
    /// `(‖u‖_∞ + ⟦u⟧_{B^{1/2}_{2,∞}}) ⟦I⟧_{B^γ_{q,∞}}`.
    pub rhs_factor: f64,
    /// `value / rhs_factor`.
    pub realized_constant: f64,
}

/// Weighted pairing for a piecewise-linear integrator: on each cell `∂_s I`
/// is the constant slope, and `e^{λ(t_{k+1}-s)} u_s` is integrated by the
/// trapezoid rule, so `λ = 0` reproduces the sewn pairing.
pub fn weighted_pairing_bound(
    u: &SampledPath,
    i: &SampledPath,
    ip: &InnerProduct,
    lambda: f64,
    q: f64,
    gamma: f64,
) -> Result<WeightedBoundReport> {
    check_same_grid(u, i)?;
    ip.check_dim(u.dim())?;
    ip.check_dim(i.dim())?;
    let grid = *u.grid();
    let decay = (lambda * grid.dt()).exp();
    let mut j = vec![0.0; grid.len()];
    let d = u.dim();
    let mut inc = vec![0.0; d];
    let mut weighted = vec![0.0; d];
    for k in 0..grid.n() {
        for c in 0..d {
            inc[c] = i.row(k + 1)[c] - i.row(k)[c];
            weighted[c] = 0.5 * (decay * u.row(k)[c] + u.row(k + 1)[c]);
        }
        j[k + 1] = decay * j[k] + ip.inner(&inc, &weighted);
    }
    let path = SampledPath::scalar(grid, j)?;
    let value = path.max_abs();
    let u_part = linf_norm(u, ip)? + besov_seminorm(u, BesovIndex::new(0.5, 2.0)?, ip)?;
    let i_part = besov_seminorm(i, BesovIndex::new(gamma, q)?, ip)?;
    let rhs_factor = u_part * i_part;
    let realized_constant = if rhs_factor > 0.0 {
        value / rhs_factor
    } else if value == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(WeightedBoundReport {
        path,
        value,
        rhs_factor,
        realized_constant,
    })
}

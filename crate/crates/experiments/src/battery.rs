//! Pure-analysis residual battery: sewing, Young pairings, chain rules and
//! local times, each compared with a closed form or a direct sum.

use std::f64::consts::PI;

use pathwise_core::grid_paths::{generate_fbm, InnerProduct, SampledPath, TimeGrid};
use pathwise_core::occupation::{occupation_formula_check, regularized_drift_integral, DriftSpec, SpatialBins};
use pathwise_core::pde::SpaceGrid;
use pathwise_core::sewing::{fit_slope, sew_with, FnGerm, SewOptions};
use pathwise_core::young::{chain_rule_residual, energy_identity_residual, pair_sew, ChainRuleMap};
use serde::Serialize;

use crate::error::Result;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    /// `value` must lie in `[lower, threshold]`; `lower` is `-inf` for
    /// one-sided checks.
    pub lower: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &'static str, value: f64, threshold: f64) -> Self {
        Self {
            name,
            value,
            threshold,
            lower: f64::NEG_INFINITY,
            passed: value <= threshold,
        }
    }

    fn within(name: &'static str, value: f64, lower: f64, upper: f64) -> Self {
        Self {
            name,
            value,
            threshold: upper,
            lower,
            passed: value >= lower && value <= upper,
        }
    }
}

/// Composite Simpson rule with `m` (even) cells.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    let mut acc = f(a) + f(b);
    for k in 1..m {
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

fn smooth_u(t: f64) -> f64 {
    (2.0 * t).cos() + t
}

fn smooth_f(t: f64) -> f64 {
    (5.0 * t).sin()
}

fn smooth_df(t: f64) -> f64 {
    5.0 * (5.0 * t).cos()
}

/// `|𝓘(u_s(f_t - f_s))_T - ∫u f' dt|` on `n` cells and the oracle value.
pub fn sewing_bochner_gap(n: usize, opts: SewOptions) -> Result<(f64, f64)> {
    let grid = TimeGrid::unit(n)?;
    let germ = FnGerm::scalar(1.0, 2.0, |s, t| smooth_u(s) * (smooth_f(t) - smooth_f(s)));
    let sewn = sew_with(&germ, &grid, opts)?.sewn.last()[0];
    let oracle = simpson(|t| smooth_u(t) * smooth_df(t), 0.0, 1.0, 1 << 16);
    Ok(((sewn - oracle).abs(), oracle))
}

/// Sup norm of the sewing of `(t - s)²`.
pub fn quadratic_sewing_sup(n: usize, opts: SewOptions) -> Result<f64> {
    let grid = TimeGrid::unit(n)?;
    let germ = FnGerm::scalar(2.0, 2.0, |s, t| (t - s) * (t - s));
    Ok(sew_with(&germ, &grid, opts)?.sewn.max_abs())
}

/// `|𝓢_T(X, dX) - (X_T² - X_0²)/2| / ‖X‖²_∞` for scalar fBm.
pub fn young_chain_rule_gap(seed: u64, hurst: f64, n: usize, opts: SewOptions) -> Result<f64> {
    let grid = TimeGrid::unit(n)?;
    let x = generate_fbm(seed, hurst, grid)?;
    let ip = InnerProduct::euclidean(1);
    let s = pair_sew(&x, &x, &ip, 2.0 * hurst - 0.05, opts)?.integral.last()[0];
    let want = 0.5 * (x.last()[0].powi(2) - x.first()[0].powi(2));
    let scale = x.max_abs().powi(2);
    Ok(if scale > 0.0 {
        (s - want).abs() / scale
    } else {
        (s - want).abs()
    })
}

/// Energy residual of the semi-discrete heat flow `X_t = e^{-λ₁t}e₁` with
/// `Y = Δ_h X` on `d` nodes and `n` steps over `[0, T]`.
pub fn heat_energy_residual(d: usize, horizon: f64, n: usize, opts: SewOptions) -> Result<f64> {
    let space = SpaceGrid::new(d)?;
    let lam = space.eigenvalue(1);
    let grid = TimeGrid::new(0.0, horizon, n)?;
    let ip = space.l2();
    let mode = space.eigenvector(1);
    let x = SampledPath::from_fn(grid, d, |t, r| {
        for (v, m) in r.iter_mut().zip(&mode) {
            *v = (-lam * t).exp() * m;
        }
    })?;
    let y = x.scaled(-lam);
    let zero = SampledPath::zeros(grid, d);
    let pair = |a: &[f64], b: &[f64]| ip.inner(a, b);
    Ok(energy_identity_residual(x.first(), &y, &zero, &x, &ip, &pair, 2.0, opts)?.max_abs())
}

/// Log-log slope of [`heat_energy_residual`] over the step counts `ns`.
pub fn heat_energy_slope(ns: &[usize], opts: SewOptions) -> Result<f64> {
    let mut pts = Vec::with_capacity(ns.len());
    for &n in ns {
        let r = heat_energy_residual(16, 0.05, n, opts)?;
        pts.push(((0.05 / n as f64).ln(), r.ln()));
    }
    Ok(fit_slope(&pts).unwrap_or(f64::NAN))
}

/// `|F(T, y_T) - F(0, y_0) - ∫∂_tF - 𝓢(∂_yF u, dI)|` for `F = e^{-λt}y`,
/// `u ≡ 1` and `I` a scalar fBm.
pub fn exp_weight_residual(seed: u64, hurst: f64, n: usize, opts: SewOptions) -> Result<f64> {
    let grid = TimeGrid::unit(n)?;
    let i = generate_fbm(seed, hurst, grid)?;
    let zero = SampledPath::zeros(grid, 1);
    let one = SampledPath::constant(grid, &[1.0])?;
    let gamma = 2.0 * hurst - 0.05;
    let rep = chain_rule_residual(
        &ChainRuleMap::exp_weight(1.5),
        0.0,
        &zero,
        &one,
        &i,
        &InnerProduct::euclidean(1),
        gamma,
        opts,
    )?;
    Ok(rep.residual.last()[0].abs())
}

/// Relative gap of the occupation-times formula for `f(z) = z²`.
pub fn occupation_square_gap(seed: u64, hurst: f64, n: usize, m: usize) -> Result<f64> {
    let grid = TimeGrid::unit(n)?;
    let w = generate_fbm(seed, hurst, grid)?;
    let bins = SpatialBins::covering(&w, m, 0.05)?;
    let c = occupation_formula_check(&|z| z * z, &w, n, bins)?;
    Ok(c.gap / c.time_side.abs().max(f64::MIN_POSITIVE))
}

/// Relative sup-gap between the sewn drift integral and the direct sum
/// `Σ Δt b(u_k - w_k)` for `b(x) = cos x + x/2`.
pub fn drift_direct_gap(seed: u64, hurst: f64, n: usize, m: usize, opts: SewOptions) -> Result<f64> {
    let d = 8;
    let grid = TimeGrid::unit(n)?;
    let w = generate_fbm(seed, hurst, grid)?;
    let ip = InnerProduct::lumped(d, 1.0 / (d + 1) as f64)?;
    let u = SampledPath::from_fn(grid, d, |t, r| {
        for (i, v) in r.iter_mut().enumerate() {
            *v = (PI * (i + 1) as f64 / (d + 1) as f64).sin() * (1.0 + t);
        }
    })?;
    let b = |x: f64| x.cos() + 0.5 * x;
    let bins = SpatialBins::covering(&w, m, 0.05)?;
    let rep = regularized_drift_integral(&DriftSpec::new(1.5, b), &w, &u, bins, 4.0, 0.8, &ip, opts)?;
    let mut direct = vec![0.0; d];
    for k in 0..n {
        for (acc, uk) in direct.iter_mut().zip(u.row(k)) {
            *acc += grid.dt() * b(uk - w.row(k)[0]);
        }
    }
    let sewn = rep.sewing.sewn.last();
    let gap = sewn.iter().zip(&direct).fold(0.0f64, |g, (a, b)| g.max((a - b).abs()));
    let scale = direct.iter().fold(0.0f64, |g, x| g.max(x.abs()));
    Ok(gap / scale.max(f64::MIN_POSITIVE))
}

/// The full battery for one seed.
pub fn analysis_battery(seed: u64, opts: SewOptions) -> Result<Vec<Check>> {
    let (gap, oracle) = sewing_bochner_gap(4096, opts)?;
    Ok(vec![
        Check::at_most("sewing_bochner", gap, 1e-6 * (1.0 + oracle.abs())),
        Check::at_most("quadratic_annihilation", quadratic_sewing_sup(4096, opts)?, 1e-10),
        Check::at_most(
            "young_chain_rule",
            young_chain_rule_gap(seed, 0.75, 1 << 14, opts)?,
            1e-3,
        ),
        Check::within(
            "energy_identity_slope",
            heat_energy_slope(&[64, 128, 256], opts)?,
            0.9,
            2.1,
        ),
        Check::at_most(
            "exp_weight_chain_rule",
            exp_weight_residual(seed, 0.8, 1 << 14, opts)?,
            1e-3,
        ),
        Check::at_most(
            "occupation_formula",
            occupation_square_gap(seed, 0.4, 1 << 14, 512)?,
            1e-2,
        ),
        Check::at_most(
            "drift_direct_sum",
            drift_direct_gap(seed, 0.4, 1 << 14, 512, opts)?,
            1e-3,
        ),
    ])
}

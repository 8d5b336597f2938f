use super::{Germ, SewingResult};
use crate::error::{invalid, Error, Result};
use crate::grid_paths::TimeGrid;
use crate::par;

/// Discrete Besov-type norms of a germ on the node pairs of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GermNorms {
    /// `Ω_p(A, τ)` at `τ = kΔt`, entry `k - 1`; nondecreasing.
    pub omega_table: Vec<f64>,
    /// `sup_τ τ^{-α} Ω_p(A, τ)`.
    pub norm_alpha: f64,
    /// `Ω̄_p(δA, τ)` at `τ = kΔt`, entry `k - 1`; nondecreasing.
    pub delta_table: Vec<f64>,
    /// `sup_τ τ^{-γ} Ω̄_p(δA, τ)`.
    pub norm_delta_gamma: f64,
    /// The `θ` values used for `Ω̄`.
    pub thetas: Vec<f64>,
}

fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// For every lag `k = 1..=n`, the `p`-mean over start nodes `r` of `f(r, k)`:
/// left Riemann over `r = 0..n-k` for finite `p`, max over `r = 0..=n-k`
/// for `p = ∞`.
pub(crate) fn lag_pmeans(
    n: usize,
    dt: f64,
    p: f64,
    f: impl Fn(usize, usize) -> Result<f64> + Sync,
) -> Result<Vec<f64>> {
    par::map_range(n, |i| {
        let k = i + 1;
        if p.is_infinite() {
            let mut m: f64 = 0.0;
            for r in 0..=n - k {
                m = m.max(f(r, k)?);
            }
            Ok(m)
        } else {
            let mut acc = 0.0;
            for r in 0..n - k {
                acc += f(r, k)?.powf(p);
            }
            Ok((dt * acc).powf(1.0 / p))
        }
    })
    .into_iter()
    .collect()
}

fn running_max(v: &[f64]) -> Vec<f64> {
    let mut m: f64 = 0.0;
    v.iter()
        .map(|x| {
            m = m.max(*x);
            m
        })
        .collect()
}

fn scaled_sup(raw: &[f64], dt: f64, exponent: f64) -> f64 {
    raw.iter()
        .enumerate()
        .map(|(i, g)| {
            if *g == 0.0 {
                0.0
            } else {
                g / ((i + 1) as f64 * dt).powf(exponent)
            }
        })
        .fold(0.0, f64::max)
}

fn theta_grid(samples: usize) -> Vec<f64> {
    let mut t: Vec<f64> = (0..samples).map(|i| i as f64 / (samples - 1) as f64).collect();
    if samples.is_multiple_of(2) {
        t.push(0.5);
        t.sort_by(f64::total_cmp);
    }
    t
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) {
        return Err(invalid(format!("integrability p must be at least 1, got {p}")));
    }
    Ok(())
}

fn checked(v: &[f64], s: f64, t: f64) -> Result<f64> {
    let r = euclid(v);
    if r.is_finite() {
        Ok(r)
    } else {
        Err(Error::GermEvaluation { s, t })
    }
}

fn omega_raw<G: Germ + ?Sized>(germ: &G, grid: &TimeGrid, p: f64) -> Result<Vec<f64>> {
    let d = germ.dim();
    lag_pmeans(grid.n(), grid.dt(), p, |r, k| {
        let (s, t) = (grid.node(r), grid.node(r + k));
        let mut out = vec![0.0; d];
        germ.eval(s, t, &mut out);
        checked(&out, s, t)
    })
}

/// `‖A‖_{𝔹^α_{p,∞}}` alone, without the `δA` part of [`germ_norms`]. The
/// exponent may exceed 1.
pub(crate) fn germ_alpha_norm<G: Germ + ?Sized>(germ: &G, grid: &TimeGrid, p: f64, alpha: f64) -> Result<f64> {
    check_p(p)?;
    Ok(scaled_sup(&omega_raw(germ, grid, p)?, grid.dt(), alpha))
}

/// `Ω_p`, `Ω̄_p` and the scaled sups `‖A‖_{𝔹^α_{p,∞}}`, `‖δA‖_{𝔹̄^γ_{p,∞}}`
/// over the node pairs of `grid`; the `θ`-sup in `Ω̄_p` runs over
/// `theta_samples` uniform points of `[0, 1]` (plus `1/2`).
pub fn germ_norms<G: Germ + ?Sized>(
    germ: &G,
    grid: &TimeGrid,
    p: f64,
    alpha: f64,
    gamma: f64,
    theta_samples: usize,
) -> Result<GermNorms> {
    check_p(p)?;
    if theta_samples < 3 {
        return Err(invalid("germ norms need at least 3 θ samples"));
    }
    let n = grid.n();
    let dt = grid.dt();
    let d = germ.dim();
    let raw = omega_raw(germ, grid, p)?;
    let thetas = theta_grid(theta_samples);
    let mut delta_raw = vec![0.0; n];
    for &theta in &thetas {
        let per = lag_pmeans(n, dt, p, |r, k| {
            let (s, t) = (grid.node(r), grid.node(r + k));
            let u = s + theta * (t - s);
            let mut out = vec![0.0; d];
            germ.delta(s, u, t, &mut out);
            checked(&out, s, t)
        })?;
        for (m, x) in delta_raw.iter_mut().zip(per) {
            *m = f64::max(*m, x);
        }
    }
    Ok(GermNorms {
        omega_table: running_max(&raw),
        norm_alpha: scaled_sup(&raw, dt, alpha),
        delta_table: running_max(&delta_raw),
        norm_delta_gamma: scaled_sup(&delta_raw, dt, gamma),
        thetas,
    })
}

/// Size of the sewing remainder `𝓡A_{s,t} = (𝓘A)_{s,t} - A_{s,t}` compared to
/// `‖δA‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemainderReport {
    /// `‖𝓡A‖_{𝔹^γ_{p,∞}}` over node pairs.
    pub remainder_norm: f64,
    /// `‖δA‖_{𝔹̄^γ_{p,∞}}` with θ on `{0, 1/4, 1/2, 3/4, 1}`.
    pub delta_norm: f64,
    /// `remainder_norm / delta_norm`; 0 when both vanish, ∞ when only `δA`
    /// vanishes.
    pub ratio: f64,
}

pub fn remainder_norm<G: Germ + ?Sized>(
    germ: &G,
    result: &SewingResult,
    p: f64,
    gamma: f64,
) -> Result<RemainderReport> {
    check_p(p)?;
    let sewn = &result.sewn;
    if sewn.dim() != germ.dim() {
        return Err(Error::DimensionMismatch {
            expected: sewn.dim(),
            actual: germ.dim(),
            context: "germ vs sewn path",
        });
    }
    let grid = *sewn.grid();
    let d = germ.dim();
    let raw = lag_pmeans(grid.n(), grid.dt(), p, |r, k| {
        let (s, t) = (grid.node(r), grid.node(r + k));
        let mut out = vec![0.0; d];
        germ.eval(s, t, &mut out);
        for ((o, a), b) in out.iter_mut().zip(sewn.row(r + k)).zip(sewn.row(r)) {
            *o = (a - b) - *o;
        }
        checked(&out, s, t)
    })?;
    let remainder_norm = scaled_sup(&raw, grid.dt(), gamma);
    let delta_norm = germ_norms(germ, &grid, p, germ.declared_alpha().min(1.0), gamma, 5)?.norm_delta_gamma;
    let ratio = if delta_norm > 0.0 {
        remainder_norm / delta_norm
    } else if remainder_norm == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(RemainderReport {
        remainder_norm,
        delta_norm,
        ratio,
    })
}

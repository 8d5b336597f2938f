use super::norms::germ_alpha_norm;
use super::{germ_norms, sew, Germ, LinearCombination, DEFAULT_MAX_LEVEL};
use crate::error::{invalid, Error, Result};
use crate::grid_paths::{besov_seminorm, BesovIndex, InnerProduct, TimeGrid};

/// Errors below this are treated as exact zeros in convergence fits.
pub const EXACT_THRESHOLD: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    /// `‖Aⁿ - A‖_{𝔹^α_{p₁,∞}}`.
    pub distance: f64,
    /// `⟦𝓘A - 𝓘Aⁿ⟧_{B^α_{p₁∧p₂,∞}}`.
    pub gap: f64,
    pub sew_converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Uniform bound on the `𝔹^α` norms of the germs and `𝔹̄^γ` norms of
    /// their coboundaries.
    pub bound_r: f64,
    /// `(γ - 1)/(γ - α)`.
    pub expected_exponent: f64,
    /// Least-squares slope of `log gap` against `log distance`; `None` in the
    /// exact regime.
    pub fitted_exponent: Option<f64>,
    /// Fewer than two rows with both quantities above [`EXACT_THRESHOLD`].
    pub exact_regime: bool,
}

impl ConvergenceReport {
    /// `|gap_n|` nonincreasing along the sequence (up to `slack`).
    pub fn gaps_nonincreasing(&self, slack: f64) -> bool {
        self.rows.windows(2).all(|w| w[1].gap <= w[0].gap + slack)
    }
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Sews every `Aⁿ` and the limit `A` on `grid` and tabulates the distance of
/// the germs against the distance of the sewn paths.
pub fn sewing_convergence(
    germs: &[&dyn Germ],
    limit: &dyn Germ,
    grid: &TimeGrid,
    p1: f64,
    alpha: f64,
    p2: f64,
    gamma: f64,
) -> Result<ConvergenceReport> {
    if germs.len() < 4 {
        return Err(invalid(format!(
            "convergence study needs at least 4 germs, got {}",
            germs.len()
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("α must lie in (0, 1), got {alpha}")));
    }
    if !(gamma > 1.0 && gamma > 1.0 / p2) {
        return Err(invalid(format!("γ must exceed 1 ∨ 1/p₂, got {gamma}")));
    }
    let p = p1.min(p2);
    let idx = BesovIndex::new(alpha, p)?;
    let ip = InnerProduct::euclidean(limit.dim());
    let base = sew(limit, grid, DEFAULT_MAX_LEVEL, None)?;
    let limit_norms = germ_norms(limit, grid, p1, alpha, gamma, 5)?;
    let mut bound_r: f64 = limit_norms.norm_alpha + germ_norms(limit, grid, p2, alpha, gamma, 5)?.norm_delta_gamma;
    let mut rows = Vec::with_capacity(germs.len());
    for g in germs {
        let own = germ_norms(*g, grid, p1, alpha, gamma, 5)?.norm_alpha;
        let own_delta = germ_norms(*g, grid, p2, alpha, gamma, 5)?.norm_delta_gamma;
        bound_r = bound_r.max(own + own_delta);
        let diff = LinearCombination::difference(*g, limit)?;
        let distance = germ_alpha_norm(&diff, grid, p1, alpha)?;
        let sewn = sew(*g, grid, DEFAULT_MAX_LEVEL, None)?;
        let gap = besov_seminorm(&sewn.sewn.sub(&base.sewn)?, idx, &ip)?;
        rows.push(ConvergenceRow {
            distance,
            gap,
            sew_converged: sewn.converged,
        });
    }
    let usable: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.distance > EXACT_THRESHOLD && r.gap > EXACT_THRESHOLD)
        .map(|r| (r.distance.ln(), r.gap.ln()))
        .collect();
    let fitted_exponent = fit_slope(&usable);
    Ok(ConvergenceReport {
        rows,
        bound_r,
        expected_exponent: (gamma - 1.0) / (gamma - alpha),
        exact_regime: fitted_exponent.is_none(),
        fitted_exponent,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalenceReport {
    /// `‖A - A′‖_{𝔹^β_{p₁,∞}}`.
    pub difference_norm: f64,
    /// `max_k |(𝓘A)_{t_k} - (𝓘A′)_{t_k}|`.
    pub max_gap: f64,
    pub agree: bool,
}

/// Checks that two germs whose difference is of order `β > 1` sew to the same
/// path: the difference norm must be finite and the sewn paths must agree
/// within `tol`.
pub fn germ_equivalence(
    a: &dyn Germ,
    b: &dyn Germ,
    grid: &TimeGrid,
    beta: f64,
    p1: f64,
    tol: f64,
) -> Result<EquivalenceReport> {
    if !(beta > 1.0) {
        return Err(Error::EquivalenceExponent(beta));
    }
    let diff = LinearCombination::difference(a, b)?;
    let difference_norm = germ_alpha_norm(&diff, grid, p1, beta)?;
    let sa = sew(a, grid, DEFAULT_MAX_LEVEL, None)?;
    let sb = sew(b, grid, DEFAULT_MAX_LEVEL, None)?;
    let max_gap = sa.sewn.sub(&sb.sewn)?.max_abs();
    Ok(EquivalenceReport {
        difference_norm,
        max_gap,
        agree: difference_norm.is_finite() && max_gap <= tol,
    })
}

//! Convergence tables over refinement levels `n = 2^level`.

use std::io::Write;

use pathwise_core::grid_paths::{InnerProduct, SampledPath, TimeGrid};
use pathwise_core::pde::{solve, DriverOperator, GelfandDiscretization};
use pathwise_core::sewing::{sew, FnGerm};
use pathwise_core::young::{chain_rule_residual, ChainRuleMap};
use serde::Serialize;

use crate::battery::simpson;
use crate::config::{ScenarioConfig, Study};
use crate::error::Result;
use crate::scenarios::sew_options;

/// Final time of the heat study.
pub const HEAT_HORIZON: f64 = 0.1;

/// Errors below this on two consecutive levels are reported as exact.
pub const EXACT_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub level: u32,
    pub n: usize,
    pub error: f64,
    /// Observed order against the previous row; `None` on the first row
    /// and when both errors are at rounding level.
    pub rate: Option<f64>,
    pub exact: bool,
}

/// Relative H-error at `T` of the implicit heat flow started from the first
/// eigenvector, against `e^{-λ₁T}e₁`.
pub fn heat_error(d: usize, n: usize) -> Result<f64> {
    let tri = GelfandDiscretization::p_laplace(d, 2.0)?;
    let space = tri.space();
    let e1 = space.eigenvector(1);
    let grid = TimeGrid::new(0.0, HEAT_HORIZON, n)?;
    let rep = solve(&tri, &DriverOperator::zero(grid, d), &e1, &grid, Default::default())?;
    let decay = (-space.eigenvalue(1) * HEAT_HORIZON).exp();
    let want: Vec<f64> = e1.iter().map(|x| decay * x).collect();
    let diff: Vec<f64> = rep.solution.last().iter().zip(&want).map(|(a, b)| a - b).collect();
    Ok(tri.ip().norm(&diff) / tri.ip().norm(&want))
}

/// Left-point Riemann–Stieltjes sums of `∫ (cos 2t + t) d(sin 5t)` over
/// `[0, 1]` against a fine Simpson oracle.
pub fn sewing_error(n: usize) -> Result<f64> {
    let grid = TimeGrid::unit(n)?;
    let germ = FnGerm::scalar(1.0, 2.0, |s, t| {
        ((2.0 * s).cos() + s) * ((5.0 * t).sin() - (5.0 * s).sin())
    });
    let sums = sew(&germ, &grid, 0, None)?.sewn.last()[0];
    let oracle = simpson(|t| ((2.0 * t).cos() + t) * 5.0 * (5.0 * t).cos(), 0.0, 1.0, 1 << 16);
    Ok((sums - oracle).abs())
}

/// Chain rule residual of `F(t, y) = e^{-3t/2}y` along `y = 𝓢(1, dI)` with
/// the smooth driver `I_t = sin 2πt`.
pub fn chain_rule_error(n: usize, cfg: &ScenarioConfig) -> Result<f64> {
    let grid = TimeGrid::unit(n)?;
    let zero = SampledPath::zeros(grid, 1);
    let one = SampledPath::constant(grid, &[1.0])?;
    let i = SampledPath::scalar_fn(grid, |t| (2.0 * std::f64::consts::PI * t).sin())?;
    let rep = chain_rule_residual(
        &ChainRuleMap::exp_weight(1.5),
        0.0,
        &zero,
        &one,
        &i,
        &InnerProduct::euclidean(1),
        1.9,
        sew_options(cfg),
    )?;
    Ok(rep.max_abs_residual)
}

pub fn convergence_table(cfg: &ScenarioConfig) -> Result<Vec<TableRow>> {
    let mut rows: Vec<TableRow> = Vec::with_capacity(cfg.levels.len());
    for &level in &cfg.levels {
        let n = 1usize << level;
        let error = match cfg.study {
            Study::Heat => heat_error(cfg.d, n)?,
            Study::Sewing => sewing_error(n)?,
            Study::ChainRule => chain_rule_error(n, cfg)?,
        };
        let (rate, exact) = match rows.last() {
            None => (None, error < EXACT_FLOOR),
            Some(prev) if prev.error < EXACT_FLOOR && error < EXACT_FLOOR => (None, true),
            Some(prev) => (Some((prev.error / error).ln() / (n as f64 / prev.n as f64).ln()), false),
        };
        rows.push(TableRow {
            level,
            n,
            error,
            rate,
            exact,
        });
    }
    Ok(rows)
}

/// `level,n,error,rate`; the rate is blank on the first row and reads
/// `exact` when consecutive errors are at rounding level.
pub fn write_table_csv<W: Write>(rows: &[TableRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["level", "n", "error", "rate"])?;
    for (k, r) in rows.iter().enumerate() {
        let rate = match r.rate {
            Some(x) => x.to_string(),
            None if k > 0 && r.exact => "exact".to_string(),
            None => String::new(),
        };
        w.write_record([r.level.to_string(), r.n.to_string(), r.error.to_string(), rate])?;
    }
    w.flush()?;
    Ok(())
}

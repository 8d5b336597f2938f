use std::io::Write;

use super::Germ;
use crate::error::{invalid, Error, Result};
use crate::grid_paths::{SampledPath, TimeGrid};
use crate::par;

pub const DEFAULT_MAX_LEVEL: u32 = 14;

/// Knobs of [`sew_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SewOptions {
    pub max_level: u32,
    /// Absolute tolerance on the accumulated path; `None` picks
    /// `1e-10·(1 + Σ_k ‖A_{t_k,t_{k+1}}‖)`.
    pub tol: Option<f64>,
}

impl Default for SewOptions {
    fn default() -> Self {
        Self {
            max_level: DEFAULT_MAX_LEVEL,
            tol: None,
        }
    }
}

/// Per-level summary over all grid cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelDiagnostic {
    pub level: u32,
    /// Sum over cells of the sup-norm change between consecutive levels.
    pub gap: f64,
    /// `max_k ‖(𝓘A)_{t_k,t_{k+1}} - A_{t_k,t_{k+1}}‖ / Δt^γ` at this level.
    pub remainder_estimate: f64,
}

#[derive(Debug, Clone)]
pub struct SewingResult {
    /// `𝓘A` on the grid, zero at `t0`.
    pub sewn: SampledPath,
    /// Deepest dyadic level evaluated in any cell.
    pub levels_used: u32,
    /// Sum of the final per-cell level gaps, a bound proxy for the distance
    /// of `sewn` to the limit in sup norm.
    pub cauchy_gap: f64,
    pub converged: bool,
    pub tol: f64,
    /// Number of cells that hit `max_level` without meeting the tolerance.
    pub unconverged_cells: usize,
    /// `A_{t_k,t_{k+1}}` for every cell, row-major.
    pub cell_germ: Vec<f64>,
    pub diagnostics: Vec<LevelDiagnostic>,
}

impl SewingResult {
    /// Increment `(𝓘A)_{t_s,t_e}` between two nodes.
    pub fn increment(&self, s: usize, e: usize) -> Vec<f64> {
        self.sewn
            .row(e)
            .iter()
            .zip(self.sewn.row(s))
            .map(|(a, b)| a - b)
            .collect()
    }

    /// CSV with header `level,gap,remainder_estimate`.
    pub fn write_diagnostics_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["level", "gap", "remainder_estimate"])?;
        for d in &self.diagnostics {
            w.write_record([
                d.level.to_string(),
                format!("{:.16e}", d.gap),
                format!("{:.16e}", d.remainder_estimate),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

struct CellOutcome {
    value: Vec<f64>,
    /// Gap at levels `1..=final_level`.
    gaps: Vec<f64>,
    /// `‖E_ℓ - A‖` at levels `1..=final_level`.
    deviations: Vec<f64>,
    converged: bool,
}

fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Richardson rates for the dyadic partition sums of a germ with `δA` of
/// order `γ`: the `2^{1-γ}` term and the integer powers seen by germs that
/// are smooth inside a cell.
fn richardson_rates(gamma: f64) -> Vec<f64> {
    let mut rates: Vec<f64> = vec![0.5, 0.25, 0.125];
    let lead = 2f64.powf(1.0 - gamma);
    if lead > 1e-3 && lead < 1.0 && rates.iter().all(|r| (r - lead).abs() > 1e-9) {
        rates.push(lead);
    }
    rates.sort_by(|a, b| b.total_cmp(a));
    rates.truncate(4);
    rates
}

fn eval_checked<G: Germ + ?Sized>(germ: &G, s: f64, t: f64, out: &mut [f64]) -> Result<()> {
    germ.eval(s, t, out);
    if out.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::GermEvaluation { s, t })
    }
}

#[allow(clippy::too_many_arguments)]
fn sew_cell<G: Germ + ?Sized>(
    germ: &G,
    a: f64,
    b: f64,
    cell: &[f64],
    rates: &[f64],
    max_level: u32,
    tol_cell: f64,
) -> Result<CellOutcome> {
    let d = cell.len();
    let mut prev_row: Vec<Vec<f64>> = vec![cell.to_vec()];
    let mut prev_best = cell.to_vec();
    let mut gaps = Vec::new();
    let mut deviations = Vec::new();
    let mut buf = vec![0.0; d];
    for level in 1..=max_level {
        let m = 1usize << level;
        let mut sum = vec![0.0; d];
        let mut abs_sum = 0.0;
        let mut left = a;
        for i in 0..m {
            let right = if i + 1 == m {
                b
            } else {
                a + (b - a) * ((i + 1) as f64 / m as f64)
            };
            eval_checked(germ, left, right, &mut buf)?;
            for (s, x) in sum.iter_mut().zip(&buf) {
                *s += x;
                abs_sum += x.abs();
            }
            left = right;
        }
        let depth = (level as usize).min(rates.len());
        let mut row = Vec::with_capacity(depth + 1);
        row.push(sum);
        for j in 1..=depth {
            let r = rates[j - 1];
            let next: Vec<f64> = row[j - 1]
                .iter()
                .zip(&prev_row[j - 1])
                .map(|(cur, old)| (cur - r * old) / (1.0 - r))
                .collect();
            row.push(next);
        }
        let best = row[depth].clone();
        let gap = sup_dist(&best, &prev_best);
        gaps.push(gap);
        deviations.push(sup_dist(&best, cell));
        let floor = 64.0 * f64::EPSILON * abs_sum;
        if gap <= tol_cell.max(floor) && (level >= 2 || gap == 0.0) {
            return Ok(CellOutcome {
                value: best,
                gaps,
                deviations,
                converged: true,
            });
        }
        prev_row = row;
        prev_best = best;
    }
    Ok(CellOutcome {
        value: prev_best,
        gaps,
        deviations,
        converged: max_level == 0,
    })
}

/// Sewing map `𝓘A` on `grid` with default options except `max_level` and
/// `tol`.
pub fn sew<G: Germ + ?Sized>(germ: &G, grid: &TimeGrid, max_level: u32, tol: Option<f64>) -> Result<SewingResult> {
    sew_with(germ, grid, SewOptions { max_level, tol })
}

/// Sewing over nested dyadic partitions of every grid cell, accelerated by
/// Richardson extrapolation across levels, accumulated from `t0`.
pub fn sew_with<G: Germ + ?Sized>(germ: &G, grid: &TimeGrid, opts: SewOptions) -> Result<SewingResult> {
    let gamma = germ.declared_gamma();
    if !(gamma > 1.0) {
        return Err(invalid(format!("sewing requires a δA exponent above 1, got {gamma}")));
    }
    if !grid.is_dyadic() {
        return Err(invalid(format!(
            "sewing requires a power-of-two number of intervals, got {}",
            grid.n()
        )));
    }
    if let Some(t) = opts.tol {
        if !(t >= 0.0) {
            return Err(invalid(format!("sewing tolerance must be nonnegative, got {t}")));
        }
    }
    let n = grid.n();
    let d = germ.dim();
    let cells: Vec<Result<Vec<f64>>> = par::map_range(n, |k| {
        let mut out = vec![0.0; d];
        eval_checked(germ, grid.node(k), grid.node(k + 1), &mut out)?;
        Ok(out)
    });
    let mut cell_germ = Vec::with_capacity(n * d);
    for c in cells {
        cell_germ.extend(c?);
    }
    let scale: f64 = cell_germ.chunks_exact(d).map(|c| sup_dist(c, &vec![0.0; d])).sum();
    let tol = opts.tol.unwrap_or(1e-10 * (1.0 + scale));
    let tol_cell = tol / n as f64;

    let outcomes: Vec<CellOutcome> = if germ.is_additive() {
        cell_germ
            .chunks_exact(d)
            .map(|c| CellOutcome {
                value: c.to_vec(),
                gaps: Vec::new(),
                deviations: Vec::new(),
                converged: true,
            })
            .collect()
    } else {
        let rates = richardson_rates(gamma);
        par::map_range(n, |k| {
            sew_cell(
                germ,
                grid.node(k),
                grid.node(k + 1),
                &cell_germ[k * d..(k + 1) * d],
                &rates,
                opts.max_level,
                tol_cell,
            )
        })
        .into_iter()
        .collect::<Result<_>>()?
    };

    let mut data = vec![0.0; (n + 1) * d];
    for (k, o) in outcomes.iter().enumerate() {
        for c in 0..d {
            data[(k + 1) * d + c] = data[k * d + c] + o.value[c];
        }
    }
    let sewn = SampledPath::new(*grid, d, data)?;

    let levels_used = outcomes.iter().map(|o| o.gaps.len() as u32).max().unwrap_or(0);
    let cauchy_gap = outcomes.iter().map(|o| o.gaps.last().copied().unwrap_or(0.0)).sum();
    let unconverged_cells = outcomes.iter().filter(|o| !o.converged).count();
    let rem_scale = if gamma.is_finite() { grid.dt().powf(gamma) } else { 1.0 };
    let diagnostics = (1..=levels_used)
        .map(|level| {
            let i = level as usize - 1;
            let gap = outcomes.iter().filter_map(|o| o.gaps.get(i)).sum();
            let remainder_estimate = outcomes
                .iter()
                .filter_map(|o| o.deviations.get(i).or(o.deviations.last()))
                .fold(0.0, |m: f64, x| m.max(*x))
                / rem_scale;
            LevelDiagnostic {
                level,
                gap,
                remainder_estimate,
            }
        })
        .collect();

    Ok(SewingResult {
        sewn,
        levels_used,
        cauchy_gap,
        converged: unconverged_cells == 0,
        tol,
        unconverged_cells,
        cell_germ,
        diagnostics,
    })
}

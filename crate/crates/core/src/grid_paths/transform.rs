use super::{SampledPath, TimeGrid};
use crate::error::{invalid, Result};

/// Piecewise-linear interpolant through `2^level` coarse cells, resampled on
/// the original grid.
pub fn mollify_path(path: &SampledPath, level: u32) -> Result<SampledPath> {
    let grid = *path.grid();
    let cells = 1usize.checked_shl(level).filter(|c| *c <= grid.n()).ok_or_else(|| {
        invalid(format!(
            "mollification level {level} too large for a grid with {} intervals",
            grid.n()
        ))
    })?;
    let coarse_grid = TimeGrid::new(grid.t0(), grid.t_end(), cells)?;
    let dim = path.dim();
    let coarse = SampledPath::from_fn(coarse_grid, dim, |t, row| path.eval_into(t, row))?;
    SampledPath::from_fn(grid, dim, |t, row| coarse.eval_into(t, row))
}

/// Trapezoid mean `⟨u⟩_{s,t}` over the nodes `s..=t`.
pub fn time_average(path: &SampledPath, s: usize, t: usize) -> Result<Vec<f64>> {
    if s >= t {
        return Err(invalid(format!("time average needs s < t, got nodes {s} and {t}")));
    }
    if t > path.grid().n() {
        return Err(invalid(format!("node {t} outside grid with n={}", path.grid().n())));
    }
    let dim = path.dim();
    let mut acc = vec![0.0; dim];
    for k in s..t {
        for ((a, x), y) in acc.iter_mut().zip(path.row(k)).zip(path.row(k + 1)) {
            *a += 0.5 * (x + y);
        }
    }
    let m = (t - s) as f64;
    Ok(acc.into_iter().map(|a| a / m).collect())
}

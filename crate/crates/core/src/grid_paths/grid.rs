use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Uniform partition of `[t0, t_end]` into `n` intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t0: f64,
    t_end: f64,
    n: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t_end: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("time grid needs at least one interval"));
        }
        if !(t0.is_finite() && t_end.is_finite()) || t_end <= t0 {
            return Err(invalid(format!("time grid needs t0 < T, got [{t0}, {t_end}]")));
        }
        Ok(Self { t0, t_end, n })
    }

    /// `[0, 1]` with `n` intervals.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(0.0, 1.0, n)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    /// Number of intervals.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of nodes (`n + 1`).
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn duration(&self) -> f64 {
        self.t_end - self.t0
    }

    pub fn dt(&self) -> f64 {
        self.duration() / self.n as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        if k == self.n {
            self.t_end
        } else {
            self.t0 + self.duration() * (k as f64 / self.n as f64)
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n).map(move |k| self.node(k))
    }

    pub fn is_dyadic(&self) -> bool {
        self.n.is_power_of_two()
    }

    /// Cell index `k` and local fraction `θ ∈ [0, 1]` with `t = t_k + θ·Δt`.
    /// Times outside the grid are clamped.
    pub fn locate(&self, t: f64) -> (usize, f64) {
        let x = ((t - self.t0) / self.dt()).clamp(0.0, self.n as f64);
        let k = (x.floor() as usize).min(self.n - 1);
        (k, x - k as f64)
    }

    /// Sub-grid `[t_s, t_e]` made of the nodes `s..=e`.
    pub fn restrict(&self, s: usize, e: usize) -> Result<Self> {
        if s >= e || e > self.n {
            return Err(invalid(format!(
                "invalid node window [{s}, {e}] on grid with n={}",
                self.n
            )));
        }
        Ok(Self {
            t0: self.node(s),
            t_end: self.node(e),
            n: e - s,
        })
    }

    /// Grid with the same interval and `factor`-times as many cells.
    pub fn refine(&self, factor: usize) -> Self {
        Self {
            n: self.n * factor.max(1),
            ..*self
        }
    }
}

/// Samples of a `dim`-vector valued path at every node of a [`TimeGrid`],
/// stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    grid: TimeGrid,
    dim: usize,
    data: Vec<f64>,
}

impl SampledPath {
    pub fn new(grid: TimeGrid, dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("path dimension must be positive"));
        }
        if data.len() != grid.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: grid.len() * dim,
                actual: data.len(),
                context: "path samples",
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { node: pos / dim });
        }
        Ok(Self { grid, dim, data })
    }

    pub fn zeros(grid: TimeGrid, dim: usize) -> Self {
        Self {
            grid,
            dim,
            data: vec![0.0; grid.len() * dim],
        }
    }

    pub fn scalar(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        Self::new(grid, 1, values)
    }

    pub fn from_fn(grid: TimeGrid, dim: usize, mut f: impl FnMut(f64, &mut [f64])) -> Result<Self> {
        let mut data = vec![0.0; grid.len() * dim];
        for (k, row) in data.chunks_exact_mut(dim).enumerate() {
            f(grid.node(k), row);
        }
        Self::new(grid, dim, data)
    }

    pub fn scalar_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(grid, 1, |t, row| row[0] = f(t))
    }

    /// Path constant in time.
    pub fn constant(grid: TimeGrid, value: &[f64]) -> Result<Self> {
        Self::from_fn(grid, value.len(), |_, row| row.copy_from_slice(value))
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of samples (`n + 1`).
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn row_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Component `c` as a scalar sequence.
    pub fn component(&self, c: usize) -> Vec<f64> {
        self.rows().map(|r| r[c]).collect()
    }

    pub fn first(&self) -> &[f64] {
        self.row(0)
    }

    pub fn last(&self) -> &[f64] {
        self.row(self.grid.n())
    }

    /// Piecewise-linear interpolation at time `t` (clamped to the grid).
    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        let (k, theta) = self.grid.locate(t);
        let a = self.row(k);
        let b = self.row(k + 1);
        for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
            *o = x + theta * (y - x);
        }
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(t, &mut out);
        out
    }

    pub fn map(&self, out_dim: usize, mut f: impl FnMut(f64, &[f64], &mut [f64])) -> Result<SampledPath> {
        let mut data = vec![0.0; self.grid.len() * out_dim];
        for (k, row) in data.chunks_exact_mut(out_dim).enumerate() {
            f(self.grid.node(k), self.row(k), row);
        }
        SampledPath::new(self.grid, out_dim, data)
    }

    fn check_compatible(&self, other: &SampledPath) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)));
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: other.dim,
                context: "path state dimension",
            });
        }
        Ok(())
    }

    /// `a·self + b·other`.
    pub fn lincomb(&self, a: f64, other: &SampledPath, b: f64) -> Result<SampledPath> {
        self.check_compatible(other)?;
        let data = self.data.iter().zip(&other.data).map(|(x, y)| a * x + b * y).collect();
        SampledPath::new(self.grid, self.dim, data)
    }

    pub fn sub(&self, other: &SampledPath) -> Result<SampledPath> {
        self.lincomb(1.0, other, -1.0)
    }

    pub fn add(&self, other: &SampledPath) -> Result<SampledPath> {
        self.lincomb(1.0, other, 1.0)
    }

    pub fn scaled(&self, c: f64) -> SampledPath {
        SampledPath {
            grid: self.grid,
            dim: self.dim,
            data: self.data.iter().map(|x| c * x).collect(),
        }
    }

    /// Path minus its initial value, so that it starts at zero.
    pub fn pinned(&self) -> SampledPath {
        let start = self.first().to_vec();
        let mut out = self.clone();
        for row in out.data.chunks_exact_mut(self.dim) {
            for (x, s) in row.iter_mut().zip(&start) {
                *x -= s;
            }
        }
        out
    }

    /// Nodes `s..=e` as a path on the restricted grid.
    pub fn restrict(&self, s: usize, e: usize) -> Result<SampledPath> {
        let grid = self.grid.restrict(s, e)?;
        let data = self.data[s * self.dim..(e + 1) * self.dim].to_vec();
        SampledPath::new(grid, self.dim, data)
    }

    /// Every `factor`-th node; the grid must divide evenly.
    pub fn subsample(&self, factor: usize) -> Result<SampledPath> {
        if factor == 0 || !self.grid.n().is_multiple_of(factor) {
            return Err(invalid(format!("cannot subsample n={} by {factor}", self.grid.n())));
        }
        let grid = TimeGrid::new(self.grid.t0(), self.grid.t_end(), self.grid.n() / factor)?;
        let mut data = Vec::with_capacity(grid.len() * self.dim);
        for k in 0..grid.len() {
            data.extend_from_slice(self.row(k * factor));
        }
        SampledPath::new(grid, self.dim, data)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Antiderivative of the piecewise-linear interpolant of a path; answers exact
/// averages `⟨u⟩_{s,t}` for arbitrary `s < t`.
#[derive(Debug, Clone)]
pub struct PathIntegrator {
    path: SampledPath,
    cumulative: Vec<f64>,
}

impl PathIntegrator {
    pub fn new(path: &SampledPath) -> Self {
        let path = path.clone();
        let dim = path.dim();
        let dt = path.grid().dt();
        let mut cumulative = vec![0.0; path.len() * dim];
        for k in 0..path.grid().n() {
            let (a, b) = (path.row(k), path.row(k + 1));
            for c in 0..dim {
                cumulative[(k + 1) * dim + c] = cumulative[k * dim + c] + 0.5 * dt * (a[c] + b[c]);
            }
        }
        Self { path, cumulative }
    }

    pub fn path(&self) -> &SampledPath {
        &self.path
    }

    /// `∫_{t_k}^{t_k + θΔt} u` for the linear piece on cell `k`.
    fn partial(&self, k: usize, theta: f64, c: usize) -> f64 {
        let dt = self.path.grid().dt();
        let a = self.path.row(k)[c];
        let b = self.path.row(k + 1)[c];
        dt * theta * (a + 0.5 * theta * (b - a))
    }

    /// Exact mean of the interpolant over `[s, t]`, written into `out`.
    /// For `s == t` this is the point value.
    pub fn average_into(&self, s: f64, t: f64, out: &mut [f64]) {
        let grid = self.path.grid();
        let dim = self.path.dim();
        let (ks, ts) = grid.locate(s);
        let (kt, tt) = grid.locate(t);
        if ks == kt || t <= s {
            self.path.eval_into(0.5 * (s + t), out);
            return;
        }
        let len = t - s;
        for (c, o) in out.iter_mut().enumerate().take(dim) {
            let head = self.partial(ks, 1.0, c) - self.partial(ks, ts, c);
            let middle = self.cumulative[kt * dim + c] - self.cumulative[(ks + 1) * dim + c];
            let tail = self.partial(kt, tt, c);
            *o = (head + middle + tail) / len;
        }
    }

    /// Trapezoid integral from `t0` to node `k`.
    pub fn cumulative(&self, k: usize) -> &[f64] {
        let dim = self.path.dim();
        &self.cumulative[k * dim..(k + 1) * dim]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_degenerate_input() {
        assert!(TimeGrid::new(0.0, 1.0, 0).is_err());
        assert!(TimeGrid::new(1.0, 1.0, 4).is_err());
        let g = TimeGrid::new(0.0, 2.0, 4).unwrap();
        assert_eq!(g.node(4), 2.0);
        assert_eq!(g.dt(), 0.5);
        assert_eq!(g.locate(0.75), (1, 0.5));
        assert_eq!(g.locate(2.0), (3, 1.0));
    }

    #[test]
    fn path_rejects_non_finite_samples() {
        let g = TimeGrid::unit(2).unwrap();
        let err = SampledPath::scalar(g, vec![0.0, f64::NAN, 1.0]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { node: 1 }));
        assert!(SampledPath::scalar(g, vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn averages_of_linear_interpolant_are_exact() {
        let g = TimeGrid::unit(8).unwrap();
        let p = SampledPath::scalar_fn(g, |t| 3.0 * t + 1.0).unwrap();
        let integ = PathIntegrator::new(&p);
        let mut out = [0.0];
        integ.average_into(0.1, 0.9, &mut out);
        assert!((out[0] - (3.0 * 0.5 + 1.0)).abs() < 1e-14);
        integ.average_into(0.30, 0.31, &mut out);
        assert!((out[0] - (3.0 * 0.305 + 1.0)).abs() < 1e-14);
    }
}

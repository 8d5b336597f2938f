use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid_paths::{SampledPath, TimeGrid};

/// `m` equal bins covering `[z_min, z_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialBins {
    z_min: f64,
    z_max: f64,
    m: usize,
}

impl SpatialBins {
    pub fn new(z_min: f64, z_max: f64, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(invalid("need at least one bin"));
        }
        if !(z_min.is_finite() && z_max.is_finite()) || z_max <= z_min {
            return Err(invalid(format!(
                "bin range must satisfy z_min < z_max, got [{z_min}, {z_max}]"
            )));
        }
        Ok(Self { z_min, z_max, m })
    }

    /// Bins covering the range of `w` with a relative margin on both sides.
    pub fn covering(w: &SampledPath, m: usize, margin: f64) -> Result<Self> {
        let (lo, hi) = w
            .data()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
        let span = (hi - lo).max(1e-12);
        Self::new(lo - margin * span, hi + margin * span, m)
    }

    pub fn z_min(&self) -> f64 {
        self.z_min
    }

    pub fn z_max(&self) -> f64 {
        self.z_max
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn width(&self) -> f64 {
        (self.z_max - self.z_min) / self.m as f64
    }

    pub fn center(&self, k: usize) -> f64 {
        self.z_min + (k as f64 + 0.5) * self.width()
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.m).map(move |k| self.center(k))
    }

    /// Bin of `z`; the right edge belongs to the last bin.
    pub fn index(&self, z: f64) -> Option<usize> {
        if !(z >= self.z_min && z <= self.z_max) {
            return None;
        }
        Some((((z - self.z_min) / self.width()) as usize).min(self.m - 1))
    }
}

/// Histogram local time `L_t[k] = (Δt / width)·#{j : t_j < t, w_{t_j} ∈ bin k}`.
///
/// Stored as the bin visited on each cell, so `L` is piecewise linear in time
/// with slope `1/width` in that bin.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTimeField {
    bins: SpatialBins,
    grid: TimeGrid,
    cell_bins: Vec<usize>,
}

pub fn local_time(w: &SampledPath, bins: SpatialBins) -> Result<LocalTimeField> {
    if w.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            actual: w.dim(),
            context: "local time needs a scalar path",
        });
    }
    let mut cell_bins = Vec::with_capacity(w.grid().n());
    for (node, &z) in w.data().iter().enumerate() {
        let k = bins.index(z).ok_or(Error::OutsideBins {
            value: z,
            node,
            z_min: bins.z_min,
            z_max: bins.z_max,
        })?;
        if node < w.grid().n() {
            cell_bins.push(k);
        }
    }
    Ok(LocalTimeField {
        bins,
        grid: *w.grid(),
        cell_bins,
    })
}

impl LocalTimeField {
    pub fn bins(&self) -> &SpatialBins {
        &self.bins
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Bin visited on cell `j`.
    pub fn cell_bin(&self, j: usize) -> usize {
        self.cell_bins[j]
    }

    /// `L_{t_s, t_e}` over all bins.
    pub fn increment(&self, s: usize, e: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.bins.m];
        let unit = self.grid.dt() / self.bins.width();
        for &k in &self.cell_bins[s.min(e)..e] {
            out[k] += unit;
        }
        out
    }

    /// `L_{t_k}` over all bins.
    pub fn row(&self, k: usize) -> Vec<f64> {
        self.increment(0, k)
    }

    /// `width · Σ_k L_t[k]`, which equals the elapsed time `t_k - t0`.
    pub fn mass(&self, k: usize) -> f64 {
        self.bins.width() * self.row(k).iter().sum::<f64>()
    }

    /// `Σ_{j ∈ [s,e)} Δt·b(u - z_{c_j})`, i.e. `(b ∗ L_{s,e})(u)` without
    /// materializing the histogram.
    pub fn convolve_at(&self, b: &(dyn Fn(f64) -> f64 + Sync), s: usize, e: usize, u: f64) -> f64 {
        let dt = self.grid.dt();
        self.cell_bins[s..e]
            .iter()
            .map(|&k| dt * b(u - self.bins.center(k)))
            .sum()
    }

    /// Long-format CSV `t,z,value`, every `stride`-th time node.
    pub fn write_csv<W: Write>(&self, writer: W, stride: usize) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "z", "value"])?;
        let stride = stride.max(1);
        let mut nodes: Vec<usize> = (0..=self.grid.n()).step_by(stride).collect();
        if nodes.last() != Some(&self.grid.n()) {
            nodes.push(self.grid.n());
        }
        for k in nodes {
            let t = self.grid.node(k);
            for (b, v) in self.row(k).iter().enumerate() {
                w.write_record([
                    format!("{t:.16e}"),
                    format!("{:.16e}", self.bins.center(b)),
                    format!("{v:.16e}"),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Both sides of the occupation-times formula at node `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OccupationCheck {
    /// `Δt Σ_{t_j < t} f(w_{t_j})`.
    pub time_side: f64,
    /// `width Σ_k f(z_k) L_t[k]`.
    pub space_side: f64,
    pub gap: f64,
}

pub fn occupation_formula_check(
    f: &dyn Fn(f64) -> f64,
    w: &SampledPath,
    t: usize,
    bins: SpatialBins,
) -> Result<OccupationCheck> {
    if t > w.grid().n() {
        return Err(invalid(format!("node {t} outside grid with n={}", w.grid().n())));
    }
    let field = local_time(w, bins)?;
    let dt = w.grid().dt();
    let time_side: f64 = w.data()[..t].iter().map(|z| dt * f(*z)).sum();
    let row = field.row(t);
    let space_side: f64 = row
        .iter()
        .enumerate()
        .map(|(k, l)| bins.width() * f(bins.center(k)) * l)
        .sum();
    Ok(OccupationCheck {
        time_side,
        space_side,
        gap: (time_side - space_side).abs(),
    })
}

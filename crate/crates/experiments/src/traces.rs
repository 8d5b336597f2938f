//! Per-step tables written next to each run. Every pass/fail flag in a
//! manifest can be recomputed from these files alone.

use std::path::Path;

use pathwise_core::grid_paths::TimeGrid;
use pathwise_core::pde::{ContractionAudit, DriverOperator, GelfandDiscretization, SolveReport};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::battery::Check;
use crate::error::Result;

/// One implicit step of the discrete energy inequality
/// `e_new ≤ e_old + allowance + noise_work + slack`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyRow {
    pub step: usize,
    pub energy_old: f64,
    pub energy_new: f64,
    /// `2Δt(c₂ e_new + f)`.
    pub allowance: f64,
    /// `2(u_{k+1}, I_{k,k+1}(u_k))`.
    pub noise_work: f64,
    /// Newton residual and rounding allowance.
    pub slack: f64,
}

impl EnergyRow {
    /// Same operation order as the solver's own check.
    pub fn holds(&self) -> bool {
        !(self.energy_new > self.energy_old + self.allowance + self.noise_work + self.slack)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionRow {
    pub step: usize,
    pub t: f64,
    pub diff_norm: f64,
    pub bound: f64,
    pub ratio: f64,
    pub tol_disc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub n: usize,
    pub lhs: f64,
    pub rhs_data: f64,
    pub fitted_constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryRow {
    pub name: String,
    pub value: f64,
    pub lower: f64,
    pub threshold: f64,
    pub passed: bool,
}

pub fn energy_rows(tri: &GelfandDiscretization, drv: &DriverOperator, rep: &SolveReport) -> Result<Vec<EnergyRow>> {
    let k = *tri.constants();
    let ip = tri.ip();
    let u = &rep.solution;
    let dt = u.grid().dt();
    let mut rows = Vec::with_capacity(u.grid().n());
    for step in 0..u.grid().n() {
        let inc = drv.increment_frozen(u.row(step), step, step + 1)?;
        let next = u.row(step + 1);
        let e_old = rep.energy_trace[step];
        let e_new = rep.energy_trace[step + 1];
        let residual = rep.newton.residuals[step];
        rows.push(EnergyRow {
            step,
            energy_old: e_old,
            energy_new: e_new,
            allowance: 2.0 * dt * (k.c2 * e_new + k.f),
            noise_work: 2.0 * ip.inner(next, &inc),
            slack: 2.0 * residual * e_new.sqrt() + 1e-12 * (1.0 + e_old + e_new),
        });
    }
    Ok(rows)
}

pub fn contraction_rows(grid: &TimeGrid, audit: &ContractionAudit) -> Vec<ContractionRow> {
    grid.nodes()
        .enumerate()
        .map(|(k, t)| ContractionRow {
            step: k,
            t,
            diff_norm: audit.diff_trace[k],
            bound: audit.bound_trace[k],
            ratio: audit.ratio_trace[k],
            tol_disc: audit.tol_disc,
        })
        .collect()
}

fn write_rows<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<Vec<T>, _>>()?)
}

pub fn write_energy_csv(rows: &[EnergyRow], path: &Path) -> Result<()> {
    write_rows(rows, path)
}

pub fn write_contraction_csv(rows: &[ContractionRow], path: &Path) -> Result<()> {
    write_rows(rows, path)
}

pub fn write_bound_csv(rows: &[BoundRow], path: &Path) -> Result<()> {
    write_rows(rows, path)
}

pub fn write_battery_csv(checks: &[Check], path: &Path) -> Result<()> {
    let rows: Vec<BatteryRow> = checks
        .iter()
        .map(|c| BatteryRow {
            name: c.name.to_string(),
            value: c.value,
            lower: c.lower,
            threshold: c.threshold,
            passed: c.passed,
        })
        .collect();
    write_rows(&rows, path)
}

/// Energy flag recomputed from an `*_energy.csv` file.
pub fn energy_flag_from_csv(path: &Path) -> Result<bool> {
    Ok(read_rows::<EnergyRow>(path)?.iter().all(EnergyRow::holds))
}

/// `(nonincreasing, within_tolerance)` recomputed from `contraction.csv`.
pub fn contraction_flags_from_csv(path: &Path) -> Result<(bool, bool)> {
    let rows: Vec<ContractionRow> = read_rows(path)?;
    let nonincreasing = rows.windows(2).all(|p| p[1].diff_norm <= p[0].diff_norm);
    let within = rows.iter().all(|r| r.ratio <= 1.0 + r.tol_disc);
    Ok((nonincreasing, within))
}

/// Battery flags recomputed from `battery.csv`.
pub fn battery_flags_from_csv(path: &Path) -> Result<Vec<(String, bool)>> {
    let rows: Vec<BatteryRow> = read_rows(path)?;
    Ok(rows
        .into_iter()
        .map(|r| {
            let ok = r.value >= r.lower && r.value <= r.threshold;
            (r.name, ok)
        })
        .collect())
}

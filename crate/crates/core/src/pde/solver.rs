use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::driver::{DriverKind, DriverOperator};
use super::operator::GelfandDiscretization;
use crate::error::{invalid, Error, Result};
use crate::grid_paths::{besov_seminorm, lp_norm, BesovIndex, SampledPath, TimeGrid};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub newton_tol: f64,
    pub newton_max: u32,
    /// Constant `C` the a priori bound is audited against; `None` only
    /// checks finiteness and reports the fitted value.
    pub reference_constant: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            newton_tol: 1e-12,
            newton_max: 50,
            reference_constant: None,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct NewtonStats {
    /// Iterations per time step.
    pub iterations: Vec<u32>,
    /// Steps that left the damped Newton path for relaxed fixed-point
    /// iteration.
    pub fallbacks: usize,
    /// Largest final residual `‖R‖_H` over all steps.
    pub max_residual: f64,
    /// Final residual `‖R‖_H` per time step.
    #[serde(skip)]
    pub residuals: Vec<f64>,
}

/// `sup‖u‖²_H + ‖u‖²_{B^{1/2}_{2,∞}H} + ∫‖u‖^α_V` against
/// `‖u0‖²_H + ‖f‖_{L¹} + ‖g‖^{α'}_{L^{α'}} + 1`.
#[derive(Debug, Clone, Serialize)]
pub struct BoundAudit {
    pub lhs: f64,
    pub rhs_data: f64,
    pub fitted_constant: f64,
    pub reference_constant: Option<f64>,
    pub finite: bool,
    pub violated: bool,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: SampledPath,
    /// `‖u_k‖²_H` per node.
    pub energy_trace: Vec<f64>,
    /// `Δt Σ_{j≤k} ‖u_j‖^α_V` per node.
    pub v_norm_cumulative: Vec<f64>,
    pub besov_half: f64,
    pub newton: NewtonStats,
    /// Steps `k` at which `‖u^{k+1}‖² ≤ ‖u^k‖² + 2Δt(c2‖u^{k+1}‖² + f) + 2(u^{k+1}, ΔI_k)`
    /// failed beyond the slack implied by the Newton residual.
    pub energy_violations: Vec<usize>,
    pub bound_audit: BoundAudit,
}

impl SolveReport {
    pub fn v_norm_integral(&self) -> f64 {
        *self.v_norm_cumulative.last().unwrap_or(&0.0)
    }

    pub fn energy_inequality_holds(&self) -> bool {
        self.energy_violations.is_empty()
    }

    pub fn traces_finite(&self) -> bool {
        self.energy_trace
            .iter()
            .chain(&self.v_norm_cumulative)
            .all(|x| x.is_finite())
    }

    /// CSV with columns `t,energy,vnorm_cum` and `diff_norm` when given.
    pub fn write_trace_csv<W: Write>(&self, writer: W, diff_norm: Option<&[f64]>) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["t", "energy", "vnorm_cum"];
        if diff_norm.is_some() {
            header.push("diff_norm");
        }
        w.write_record(&header)?;
        for (k, t) in self.solution.grid().nodes().enumerate() {
            let mut rec = vec![
                format!("{t:.16e}"),
                format!("{:.16e}", self.energy_trace[k]),
                format!("{:.16e}", self.v_norm_cumulative[k]),
            ];
            if let Some(d) = diff_norm {
                rec.push(format!("{:.16e}", d[k]));
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary_json(&self) -> serde_json::Value {
        let it = &self.newton.iterations;
        serde_json::json!({
            "n": self.solution.grid().n(),
            "d": self.solution.dim(),
            "final_energy": self.energy_trace.last(),
            "max_energy": self.energy_trace.iter().copied().fold(0.0, f64::max),
            "v_norm_integral": self.v_norm_integral(),
            "besov_half": self.besov_half,
            "newton": {
                "max_iterations": it.iter().max(),
                "mean_iterations": it.iter().map(|x| *x as f64).sum::<f64>() / it.len().max(1) as f64,
                "fallbacks": self.newton.fallbacks,
                "max_residual": self.newton.max_residual,
            },
            "energy_inequality_holds": self.energy_inequality_holds(),
            "energy_violations": self.energy_violations.len(),
            "bound_audit": self.bound_audit,
        })
    }

    /// Writes `<stem>_trace.csv` and `<stem>_summary.json`.
    pub fn save(&self, dir: &Path, stem: &str, diff_norm: Option<&[f64]>) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{stem}_trace.csv"));
        self.write_trace_csv(std::fs::File::create(&csv_path)?, diff_norm)?;
        let json_path = dir.join(format!("{stem}_summary.json"));
        std::fs::write(&json_path, serde_json::to_string_pretty(&self.summary_json())?)?;
        Ok((csv_path, json_path))
    }
}

struct StepOutcome {
    iterations: u32,
    fallback: bool,
    residual: f64,
}

fn residual(tri: &GelfandDiscretization, t: f64, dt: f64, v: &[f64], rhs: &[f64], out: &mut [f64]) {
    tri.apply(t, v, out);
    for ((o, x), b) in out.iter_mut().zip(v).zip(rhs) {
        *o = x - dt * *o - b;
    }
}

/// Solves `v - Δt A(t, v) = rhs` by damped Newton, falling back to
/// `v ← v - R(v)/2` when no descent step is found.
fn implicit_step(
    tri: &GelfandDiscretization,
    t: f64,
    dt: f64,
    rhs: &[f64],
    v: &mut [f64],
    opts: &SolveOptions,
    step: usize,
) -> Result<StepOutcome> {
    let ip = tri.ip();
    let d = v.len();
    let target = opts.newton_tol * (1.0 + ip.norm(rhs));
    let mut r = vec![0.0; d];
    let mut trial = vec![0.0; d];
    let mut r_trial = vec![0.0; d];
    residual(tri, t, dt, v, rhs, &mut r);
    let mut rn = ip.norm(&r);
    let mut fallback = false;
    for it in 0..opts.newton_max {
        if rn <= target {
            return Ok(StepOutcome {
                iterations: it,
                fallback,
                residual: rn,
            });
        }
        let mut accepted = false;
        if !fallback {
            if let Some(delta) = tri.jacobian(t, v).shifted_identity(dt).solve(&r) {
                let mut lam = 1.0;
                while lam > 1e-10 {
                    for ((x, y), dd) in trial.iter_mut().zip(v.iter()).zip(&delta) {
                        *x = y - lam * dd;
                    }
                    residual(tri, t, dt, &trial, rhs, &mut r_trial);
                    let tn = ip.norm(&r_trial);
                    if tn.is_finite() && tn < (1.0 - 1e-4 * lam) * rn {
                        v.copy_from_slice(&trial);
                        r.copy_from_slice(&r_trial);
                        rn = tn;
                        accepted = true;
                        break;
                    }
                    lam *= 0.5;
                }
            }
            if !accepted {
                fallback = true;
            }
        }
        if !accepted {
            for (x, y) in v.iter_mut().zip(&r) {
                *x -= 0.5 * y;
            }
            residual(tri, t, dt, v, rhs, &mut r);
            rn = ip.norm(&r);
        }
    }
    if rn <= target {
        return Ok(StepOutcome {
            iterations: opts.newton_max,
            fallback,
            residual: rn,
        });
    }
    Err(Error::NewtonFailure { step, residual: rn })
}

/// Semi-implicit Euler `u^{k+1} = u^k + Δt A(t_{k+1}, u^{k+1}) + ΔI_k` with
/// `ΔI_k` frozen at `u^k`.
pub fn solve(
    tri: &GelfandDiscretization,
    driver: &DriverOperator,
    u0: &[f64],
    grid: &TimeGrid,
    opts: SolveOptions,
) -> Result<SolveReport> {
    tri.check(u0)?;
    tri.constants().validate()?;
    if let Some(k) = u0.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { node: k });
    }
    if driver.grid() != grid {
        return Err(Error::GridMismatch(format!(
            "driver on {:?}, solve on {grid:?}",
            driver.grid()
        )));
    }
    driver.check_admissible()?;
    driver.check_dim(tri.dim())?;
    if !(opts.newton_tol > 0.0) || opts.newton_max == 0 {
        return Err(invalid(
            "Newton tolerance must be positive and at least one iteration allowed",
        ));
    }

    let ip = tri.ip();
    let k = *tri.constants();
    let d = tri.dim();
    let n = grid.n();
    let dt = grid.dt();
    let mut data = Vec::with_capacity(d * (n + 1));
    data.extend_from_slice(u0);
    let mut energy = Vec::with_capacity(n + 1);
    let mut vcum = Vec::with_capacity(n + 1);
    energy.push(ip.norm_sq(u0));
    vcum.push(0.0);
    let mut stats = NewtonStats::default();
    let mut violations = Vec::new();
    let mut u = u0.to_vec();
    let mut next = vec![0.0; d];
    let mut rhs = vec![0.0; d];
    for step in 0..n {
        let inc = driver.increment_frozen(&u, step, step + 1)?;
        for ((r, a), b) in rhs.iter_mut().zip(&u).zip(&inc) {
            *r = a + b;
        }
        next.copy_from_slice(&rhs);
        let t = grid.node(step + 1);
        let out = implicit_step(tri, t, dt, &rhs, &mut next, &opts, step)?;
        if let Some(j) = next.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                node: (step + 1) * d + j,
            });
        }
        stats.iterations.push(out.iterations);
        stats.fallbacks += out.fallback as usize;
        stats.max_residual = stats.max_residual.max(out.residual);
        stats.residuals.push(out.residual);

        let e_old = *energy.last().unwrap();
        let e_new = ip.norm_sq(&next);
        let allowed = e_old + 2.0 * dt * (k.c2 * e_new + k.f) + 2.0 * ip.inner(&next, &inc);
        let slack = 2.0 * out.residual * e_new.sqrt() + 1e-12 * (1.0 + e_old + e_new);
        if e_new > allowed + slack {
            violations.push(step);
        }
        energy.push(e_new);
        let last = *vcum.last().unwrap();
        vcum.push(last + dt * tri.v_norm(&next).powf(k.alpha));
        data.extend_from_slice(&next);
        std::mem::swap(&mut u, &mut next);
    }
    let solution = SampledPath::new(*grid, d, data)?;
    let besov_half = besov_seminorm(&solution, BesovIndex::new(0.5, 2.0)?, ip)?;
    let l2 = lp_norm(&solution, 2.0, ip)?;
    let sup = energy.iter().copied().fold(0.0, f64::max);
    let lhs = sup + (l2 + besov_half).powi(2) + vcum[n];
    let horizon = grid.duration();
    let rhs_data = energy[0] + k.f * horizon + k.g.powf(k.alpha_conj()) * horizon + 1.0;
    let fitted_constant = lhs / rhs_data;
    let finite = lhs.is_finite() && fitted_constant.is_finite();
    let violated = !finite || opts.reference_constant.is_some_and(|c| fitted_constant > c);
    Ok(SolveReport {
        solution,
        energy_trace: energy,
        v_norm_cumulative: vcum,
        besov_half,
        newton: stats,
        energy_violations: violations,
        bound_audit: BoundAudit {
            lhs,
            rhs_data,
            fitted_constant,
            reference_constant: opts.reference_constant,
            finite,
            violated,
        },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractionAudit {
    /// `‖u_k - v_k‖_H`.
    pub diff_trace: Vec<f64>,
    /// `exp(∫h)` for additive drivers, `exp(β_t - β_0)` for multiplicative.
    pub bound_trace: Vec<f64>,
    /// `‖u_k - v_k‖² / (‖u_0 - v_0‖² bound_k)`, zero when both vanish.
    pub ratio_trace: Vec<f64>,
    pub max_ratio: f64,
    pub tol_disc: f64,
    pub within_tolerance: bool,
    /// First `k` with `‖u_{k+1} - v_{k+1}‖ > ‖u_k - v_k‖`, for additive
    /// drivers only.
    pub first_increase: Option<usize>,
}

impl ContractionAudit {
    pub fn nonincreasing(&self) -> bool {
        self.first_increase.is_none()
    }
}

/// Solves from `u0` and `v0` concurrently and compares the difference with
/// the stability bound. `tol_disc` defaults to `10Δt^{1/2}`.
pub fn contraction_audit(
    tri: &GelfandDiscretization,
    driver: &DriverOperator,
    u0: &[f64],
    v0: &[f64],
    grid: &TimeGrid,
    opts: SolveOptions,
    tol_disc: Option<f64>,
) -> Result<(ContractionAudit, SolveReport, SolveReport)> {
    let additive = match driver.kind() {
        DriverKind::Zero { .. } | DriverKind::Additive { .. } => true,
        DriverKind::LinearMultiplicative { .. } => false,
        _ => {
            return Err(invalid(format!(
                "contraction audit covers additive and linear multiplicative drivers, not {}",
                driver.name()
            )))
        }
    };
    let (ru, rv) = par::join(
        || solve(tri, driver, u0, grid, opts),
        || solve(tri, driver, v0, grid, opts),
    );
    let (ru, rv) = (ru?, rv?);
    let ip = tri.ip();
    let diff = ru.solution.sub(&rv.solution)?;
    let diff_trace: Vec<f64> = diff.rows().map(|r| ip.norm(r)).collect();
    let h = tri.constants().h;
    let bound_trace: Vec<f64> = match driver.kind() {
        DriverKind::LinearMultiplicative { beta } => {
            let b0 = beta.row(0)[0];
            beta.rows().map(|r| (r[0] - b0).exp()).collect()
        }
        _ => grid.nodes().map(|t| (h * (t - grid.t0())).exp()).collect(),
    };
    let d0 = diff_trace[0] * diff_trace[0];
    let ratio_trace: Vec<f64> = diff_trace
        .iter()
        .zip(&bound_trace)
        .map(|(x, b)| if *x == 0.0 { 0.0 } else { x * x / (d0 * b) })
        .collect();
    let max_ratio = ratio_trace.iter().copied().fold(0.0, f64::max);
    let tol_disc = tol_disc.unwrap_or(10.0 * grid.dt().sqrt());
    let first_increase = if additive {
        diff_trace.windows(2).position(|p| p[1] > p[0])
    } else {
        None
    };
    Ok((
        ContractionAudit {
            diff_trace,
            bound_trace,
            ratio_trace,
            max_ratio,
            tol_disc,
            within_tolerance: max_ratio <= 1.0 + tol_disc,
            first_increase,
        },
        ru,
        rv,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::operator::Psi;

    #[test]
    fn zero_operator_tracks_additive_driver() {
        let grid = TimeGrid::unit(32).unwrap();
        let tri = GelfandDiscretization::zero(4).unwrap();
        let z = SampledPath::from_fn(grid, 4, |t, row| {
            for (i, r) in row.iter_mut().enumerate() {
                *r = (t * (i + 1) as f64).sin() + 1.0;
            }
        })
        .unwrap();
        let drv = DriverOperator::additive(z.clone(), 0.9, 10.0).unwrap();
        let u0 = [0.5, -1.0, 2.0, 0.0];
        let rep = solve(&tri, &drv, &u0, &grid, SolveOptions::default()).unwrap();
        for k in 0..=32 {
            for (i, u) in u0.iter().enumerate() {
                let want = u + z.row(k)[i] - z.row(0)[i];
                assert!((rep.solution.row(k)[i] - want).abs() < 1e-13);
            }
        }
        assert!(rep.energy_inequality_holds());
    }

    #[test]
    fn porous_medium_decays_without_noise() {
        let grid = TimeGrid::new(0.0, 0.01, 64).unwrap();
        let tri = GelfandDiscretization::porous_medium(16, Psi::power(2.0).unwrap()).unwrap();
        let u0 = tri.space().eigenvector(1);
        let rep = solve(
            &tri,
            &DriverOperator::zero(grid, 16),
            &u0,
            &grid,
            SolveOptions::default(),
        )
        .unwrap();
        assert!(rep.energy_inequality_holds());
        assert!(rep.energy_trace.windows(2).all(|p| p[1] <= p[0]));
        assert!(rep.bound_audit.finite && !rep.bound_audit.violated);
    }

    #[test]
    fn contraction_rejects_young_driver() {
        let grid = TimeGrid::unit(8).unwrap();
        let tri = GelfandDiscretization::zero(2).unwrap();
        let x = SampledPath::scalar_fn(grid, |t| t).unwrap();
        let drv = DriverOperator::abstract_young(
            crate::young::NemytskiiMap::identity(),
            x,
            crate::young::MultiplierProduct::Scalar,
            0.9,
            10.0,
        )
        .unwrap();
        let err = contraction_audit(
            &tri,
            &drv,
            &[0.0, 0.0],
            &[1.0, 1.0],
            &grid,
            SolveOptions::default(),
            None,
        );
        assert!(err.is_err());
    }

    #[test]
    fn newton_failure_reports_step() {
        let grid = TimeGrid::unit(4).unwrap();
        let tri = GelfandDiscretization::p_laplace(8, 3.0).unwrap();
        let opts = SolveOptions {
            newton_max: 1,
            newton_tol: 1e-300,
            ..SolveOptions::default()
        };
        let u0 = tri.space().eigenvector(1);
        match solve(&tri, &DriverOperator::zero(grid, 8), &u0, &grid, opts) {
            Err(Error::NewtonFailure { step, .. }) => assert_eq!(step, 0),
            other => panic!("expected Newton failure, got {other:?}"),
        }
    }
}

//! S1–S5 solve the evolution equation under the scenario's operator and
//! driver and audit the outcome; S6 runs the analysis battery.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use pathwise_core::grid_paths::{generate_colored_fbm, generate_fbm, HurstSpec, SampledPath, TimeGrid};
use pathwise_core::occupation::{convolution_regularity, mollified_delta, SpatialBins};
use pathwise_core::pde::{
    contraction_audit, h5_diagnostic, solve, DriverKind, DriverOperator, GelfandDiscretization, Psi, SolveOptions,
    SolveReport, SpaceGrid,
};
use pathwise_core::sewing::SewOptions;
use pathwise_core::young::{MultiplierProduct, NemytskiiMap};

use crate::battery::analysis_battery;
use crate::config::{parse_config, DriverSpec, OperatorSpec, PsiKind, ScenarioConfig, ScenarioId, SigmaKind};
use crate::error::{ExperimentError, Result};
use crate::manifest::{RunManifest, RunRecord};
use crate::traces::{
    contraction_rows, energy_rows, write_battery_csv, write_bound_csv, write_contraction_csv, write_energy_csv,
    BoundRow,
};

/// Largest/smallest fitted a priori constant allowed across refinements.
pub const BOUND_SPREAD_LIMIT: f64 = 3.0;

pub fn sew_options(cfg: &ScenarioConfig) -> SewOptions {
    SewOptions {
        tol: cfg.tolerances.sew_tol,
        ..SewOptions::default()
    }
}

pub fn solve_options(cfg: &ScenarioConfig) -> SolveOptions {
    SolveOptions {
        newton_tol: cfg.tolerances.newton_tol,
        ..SolveOptions::default()
    }
}

pub fn build_triple(cfg: &ScenarioConfig) -> Result<GelfandDiscretization> {
    Ok(match &cfg.operator {
        OperatorSpec::PLaplace { p } => GelfandDiscretization::p_laplace(cfg.d, *p)?,
        OperatorSpec::PorousMedium { psi, m } => {
            let psi = match psi {
                PsiKind::Power => Psi::power(*m)?,
                PsiKind::Identity => Psi::identity(),
            };
            GelfandDiscretization::porous_medium(cfg.d, psi)?
        }
        OperatorSpec::Zero => GelfandDiscretization::zero(cfg.d)?,
    })
}

/// The scenario's driver on the grid with `cfg.n / coarsen` cells. Noise is
/// always sampled on the finest grid and subsampled, so refinements of one
/// seed see the same path.
pub fn build_driver(
    cfg: &ScenarioConfig,
    tri: &GelfandDiscretization,
    seed: u64,
    coarsen: usize,
) -> Result<DriverOperator> {
    let fine = TimeGrid::new(0.0, cfg.horizon, cfg.n)?;
    let coarse = |p: SampledPath| -> Result<SampledPath> { Ok(if coarsen > 1 { p.subsample(coarsen)? } else { p }) };
    let (gamma, q) = (cfg.gamma, cfg.q);
    Ok(match &cfg.driver {
        DriverSpec::AdditiveFbm { hurst, coloring } => {
            let ip = tri.ip();
            let basis = tri.space().sine_basis(ip, coloring.len());
            let spec = HurstSpec::new(*hurst, coloring.clone())?;
            let z = generate_colored_fbm(seed, &spec, fine, &basis, ip)?;
            DriverOperator::additive(coarse(z)?, gamma, q)?
        }
        DriverSpec::Young { sigma, hurst } => {
            let x = coarse(generate_fbm(seed, *hurst, fine)?)?;
            let sigma = match sigma {
                SigmaKind::Sin => NemytskiiMap::pointwise(1.0, 1.0, f64::sin),
                SigmaKind::Identity => NemytskiiMap::identity(),
            };
            DriverOperator::abstract_young(sigma, x, MultiplierProduct::Scalar, gamma, q)?
        }
        DriverSpec::LinearMult { hurst } => {
            DriverOperator::linear_multiplicative(coarse(generate_fbm(seed, *hurst, fine)?)?, gamma, q)?
        }
        DriverSpec::RegByNoise { eps, hurst_w, bins } => {
            let w = generate_fbm(seed, *hurst_w, fine)?;
            let bins = SpatialBins::covering(&w, *bins, 0.05)?;
            DriverOperator::regularized_drift(mollified_delta(*eps)?, coarse(w)?, bins, gamma, q)?
        }
        DriverSpec::None => {
            return Err(ExperimentError::Other(format!(
                "scenario {} has no driver",
                cfg.scenario
            )));
        }
    })
}

/// `u0 = sin(πx)` and `v0 = u0 + exp(-(x - 1/2)²/0.01)`.
pub fn initial_data(space: &SpaceGrid) -> (Vec<f64>, Vec<f64>) {
    let u0: Vec<f64> = space.nodes().map(|x| (std::f64::consts::PI * x).sin()).collect();
    let v0 = space
        .nodes()
        .zip(&u0)
        .map(|(x, u)| u + (-(x - 0.5).powi(2) / 0.01).exp())
        .collect();
    (u0, v0)
}

fn uses_contraction(id: ScenarioId) -> bool {
    matches!(id, ScenarioId::S1 | ScenarioId::S3 | ScenarioId::S4)
}

#[cfg(feature = "parallel")]
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.iter().map(f).collect()
}

fn rel(dir: &str, file: &str) -> String {
    format!("{dir}/{file}")
}

/// Saves a solve's trace, summary and energy table; records the energy and
/// finiteness flags under `stem`.
fn record_solve(
    rec: &mut RunRecord,
    dir: &Path,
    stem: &str,
    tri: &GelfandDiscretization,
    drv: &DriverOperator,
    rep: &SolveReport,
    diff_norm: Option<&[f64]>,
) -> Result<()> {
    rep.save(dir, stem, diff_norm)?;
    let rows = energy_rows(tri, drv, rep)?;
    write_energy_csv(&rows, &dir.join(format!("{stem}_energy.csv")))?;
    rec.files.push(rel(&rec.dir, &format!("{stem}_trace.csv")));
    rec.files.push(rel(&rec.dir, &format!("{stem}_summary.json")));
    rec.files.push(rel(&rec.dir, &format!("{stem}_energy.csv")));
    rec.flag(&format!("{stem}_energy_inequality"), rows.iter().all(|r| r.holds()));
    rec.flag(
        &format!("{stem}_bound_finite"),
        rep.bound_audit.finite && rep.traces_finite(),
    );
    rec.constant(&format!("{stem}_fitted_constant"), rep.bound_audit.fitted_constant);
    rec.constant(&format!("{stem}_newton_fallbacks"), rep.newton.fallbacks as f64);
    Ok(())
}

fn run_pde_seed(cfg: &ScenarioConfig, seed: u64, root: &Path) -> Result<RunRecord> {
    let mut rec = RunRecord::new(seed, format!("seed-{seed}"));
    let dir = root.join(&rec.dir);
    std::fs::create_dir_all(&dir)?;
    let grid = TimeGrid::new(0.0, cfg.horizon, cfg.n)?;
    let tri = build_triple(cfg)?;
    let drv = build_driver(cfg, &tri, seed, 1)?;
    let (u0, v0) = initial_data(tri.space());
    let opts = solve_options(cfg);
    let sew = sew_options(cfg);

    let ru = if uses_contraction(cfg.scenario) {
        let (audit, ru, rv) = contraction_audit(&tri, &drv, &u0, &v0, &grid, opts, None)?;
        let rows = contraction_rows(&grid, &audit);
        write_contraction_csv(&rows, &dir.join("contraction.csv"))?;
        rec.files.push(rel(&rec.dir, "contraction.csv"));
        if cfg.scenario == ScenarioId::S3 {
            rec.flag(
                "gronwall_within_tolerance",
                rows.iter().all(|r| r.ratio <= 1.0 + r.tol_disc),
            );
        } else {
            rec.flag(
                "contraction_nonincreasing",
                rows.windows(2).all(|p| p[1].diff_norm <= p[0].diff_norm),
            );
        }
        rec.constant("max_ratio", audit.max_ratio);
        rec.constant("final_diff_norm", *audit.diff_trace.last().unwrap_or(&f64::NAN));
        record_solve(&mut rec, &dir, "u", &tri, &drv, &ru, Some(&audit.diff_trace))?;
        record_solve(&mut rec, &dir, "v", &tri, &drv, &rv, Some(&audit.diff_trace))?;
        ru
    } else {
        let ru = solve(&tri, &drv, &u0, &grid, opts)?;
        record_solve(&mut rec, &dir, "u", &tri, &drv, &ru, None)?;
        ru
    };

    match (cfg.scenario, drv.kind()) {
        (ScenarioId::S2, _) => {
            let n = cfg.n;
            let windows: Vec<usize> = [1, 4, 16, 64].iter().map(|k| n / k).filter(|w| *w >= 2).collect();
            let table = h5_diagnostic(&drv, &ru.solution, tri.ip(), &windows, sew)?;
            let path = dir.join("h5.csv");
            let mut w = csv::Writer::from_path(&path)?;
            for row in &table.rows {
                w.serialize(row)?;
            }
            w.flush()?;
            rec.files.push(rel(&rec.dir, "h5.csv"));
            let ratio = table.fitted_ratio(cfg.horizon / 64.0, cfg.horizon).unwrap_or(f64::NAN);
            rec.constant("h5_fitted_ratio", ratio);
            rec.constant("young_constant", table.young_constant.unwrap_or(f64::NAN));
        }
        (ScenarioId::S5, DriverKind::RegularizedDrift { drift, w, field }) => {
            rec.constant("drift_regularity", convolution_regularity(drift, field, cfg.gamma));
            let sewn = drv.integral(&ru.solution, sew)?;
            let dt = grid.dt();
            let mut direct = vec![0.0; cfg.d];
            for k in 0..grid.n() {
                for (acc, u) in direct.iter_mut().zip(ru.solution.row(k)) {
                    *acc += dt * drift.eval(u - w.row(k)[0]);
                }
            }
            let gap = sewn
                .last()
                .iter()
                .zip(&direct)
                .fold(0.0f64, |g, (a, b)| g.max((a - b).abs()));
            let scale = direct.iter().fold(0.0f64, |g, x| g.max(x.abs()));
            rec.constant("drift_representation_gap", gap / scale.max(f64::MIN_POSITIVE));
        }
        _ => {}
    }
    rec.finish();
    Ok(rec)
}

fn run_battery_seed(cfg: &ScenarioConfig, seed: u64, root: &Path) -> Result<RunRecord> {
    let mut rec = RunRecord::new(seed, format!("seed-{seed}"));
    let dir = root.join(&rec.dir);
    std::fs::create_dir_all(&dir)?;
    let checks = analysis_battery(seed, sew_options(cfg))?;
    write_battery_csv(&checks, &dir.join("battery.csv"))?;
    rec.files.push(rel(&rec.dir, "battery.csv"));
    for c in &checks {
        rec.flag(c.name, c.passed);
        rec.constant(c.name, c.value);
    }
    rec.finish();
    Ok(rec)
}

/// Fitted a priori constants of the first seed on `n/4`, `n/2` and `n`.
pub fn bound_refinement(cfg: &ScenarioConfig, seed: u64) -> Result<Vec<BoundRow>> {
    let tri = build_triple(cfg)?;
    let (u0, _) = initial_data(tri.space());
    let mut rows = Vec::new();
    for coarsen in [4usize, 2, 1] {
        let drv = build_driver(cfg, &tri, seed, coarsen)?;
        let grid = *drv.grid();
        let rep = solve(&tri, &drv, &u0, &grid, solve_options(cfg))?;
        rows.push(BoundRow {
            n: grid.n(),
            lhs: rep.bound_audit.lhs,
            rhs_data: rep.bound_audit.rhs_data,
            fitted_constant: rep.bound_audit.fitted_constant,
        });
    }
    Ok(rows)
}

/// `max/min` of the fitted constants, infinite if any is not finite.
pub fn bound_spread(rows: &[BoundRow]) -> f64 {
    let cs: Vec<f64> = rows.iter().map(|r| r.fitted_constant).collect();
    if cs.iter().any(|c| !c.is_finite() || *c <= 0.0) {
        return f64::INFINITY;
    }
    let hi = cs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = cs.iter().copied().fold(f64::INFINITY, f64::min);
    hi / lo
}

/// Runs every seed of `cfg` into `out` and writes `out/manifest.json`.
/// The configuration is revalidated first, so nothing is computed for an
/// inadmissible one.
pub fn run_scenario(cfg: &ScenarioConfig, out: &Path) -> Result<RunManifest> {
    let cfg = &parse_config(&cfg.to_toml())?;
    std::fs::create_dir_all(out)?;
    let records = par_map(&cfg.seeds, |seed| match cfg.scenario {
        ScenarioId::S6 => run_battery_seed(cfg, *seed, out),
        _ => run_pde_seed(cfg, *seed, out),
    });
    let runs = records.into_iter().collect::<Result<Vec<_>>>()?;

    let mut manifest = RunManifest {
        scenario: cfg.scenario.to_string(),
        title: cfg.scenario.title().to_string(),
        config_hash: cfg.hash(),
        config: serde_json::from_str(&cfg.canonical_json())?,
        seeds: cfg.seeds.clone(),
        versions: RunManifest::versions(),
        timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        runs,
        scenario_flags: Default::default(),
        scenario_constants: Default::default(),
        scenario_files: Vec::new(),
        passed: false,
    };
    if cfg.scenario != ScenarioId::S6 {
        let rows = bound_refinement(cfg, cfg.seeds[0])?;
        write_bound_csv(&rows, &out.join("bound_refinement.csv"))?;
        manifest.scenario_files.push("bound_refinement.csv".into());
        let spread = bound_spread(&rows);
        manifest
            .scenario_flags
            .insert("bound_constant_stable".into(), spread <= BOUND_SPREAD_LIMIT);
        manifest
            .scenario_constants
            .insert("bound_constant_spread".into(), spread.is_finite().then_some(spread));
    }
    manifest.finish();
    manifest.write(out)?;
    Ok(manifest)
}

/// All six scenarios at their defaults, each into `out/<id>`.
pub fn run_battery(out: &Path, seeds: Option<&[u64]>) -> Result<Vec<RunManifest>> {
    let configs: Vec<ScenarioConfig> = ScenarioId::ALL
        .iter()
        .map(|id| {
            let mut cfg = ScenarioConfig::defaults(*id);
            if let Some(s) = seeds {
                cfg.seeds = s.to_vec();
            }
            cfg
        })
        .collect();
    par_map(&configs, |cfg| run_scenario(cfg, &out.join(cfg.scenario.as_str())))
        .into_iter()
        .collect()
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use pathwise_core::grid_paths::{generate_fbm, InnerProduct, TimeGrid};
use pathwise_core::occupation::{local_time, occupation_formula_check, SpatialBins};
use pathwise_core::sewing::SewOptions;
use pathwise_core::young::{abstract_young, pair_sew, MultiplierProduct, NemytskiiMap};
use pathwise_experiments::{
    convergence_table, parse_config, run_battery, run_scenario, write_table_csv, ExperimentError, RunManifest,
    ScenarioConfig, ScenarioId,
};

#[derive(Parser)]
#[command(
    name = "pathwise",
    version,
    about = "Pathwise sewing, Young integration and monotone SPDE experiments"
)]
struct Cli {
    /// Seed for the single-run commands; overrides `seeds` for `run`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (default `out`, or the config's `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Absolute sewing tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sigma {
    Sin,
    Identity,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sew `∫ X dX` for a scalar fBm and compare with `(X_T² - X_0²)/2`.
    Sew {
        #[arg(long, default_value_t = 0.75)]
        hurst: f64,
        #[arg(long, default_value_t = 4096)]
        n: usize,
    },
    /// `∫ σ(X) dX` for a scalar fBm against its chain-rule closed form.
    Young {
        #[arg(long, default_value_t = 0.75)]
        hurst: f64,
        #[arg(long, default_value_t = 4096)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Sigma::Sin)]
        sigma: Sigma,
    },
    /// Local time of a scalar fBm and the occupation-times formula for `z²`.
    Localtime {
        #[arg(long, default_value_t = 0.4)]
        hurst: f64,
        #[arg(long, default_value_t = 4096)]
        n: usize,
        #[arg(long, default_value_t = 256)]
        bins: usize,
    },
    /// One S1-type run: p-Laplace with additive colored fBm.
    Solve {
        #[arg(long, default_value_t = 3.0)]
        p: f64,
        #[arg(long, default_value_t = 0.75)]
        hurst: f64,
        #[arg(long, default_value_t = 1024)]
        n: usize,
        #[arg(long, default_value_t = 64)]
        d: usize,
    },
    /// Run a scenario configuration (TOML).
    Run { config: PathBuf },
    /// Print the convergence table of a configuration's `study`.
    Table { config: PathBuf },
    /// Every scenario at its defaults, each into `<out>/<id>`.
    Battery,
}

fn sew_opts(tol: Option<f64>) -> SewOptions {
    SewOptions {
        tol,
        ..SewOptions::default()
    }
}

fn read_config(path: &Path) -> Result<ScenarioConfig, ExperimentError> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_config(&text)?)
}

fn write_json(out: Option<&Path>, name: &str, v: &serde_json::Value) -> Result<(), ExperimentError> {
    println!("{}", serde_json::to_string_pretty(v)?);
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(name), serde_json::to_string_pretty(v)?)?;
    }
    Ok(())
}

fn report(m: &RunManifest, dir: &Path) {
    println!("{} {}: {}", m.scenario, m.title, if m.passed { "pass" } else { "FAIL" });
    for r in &m.runs {
        let failed: Vec<&str> = r.flags.iter().filter(|(_, v)| !**v).map(|(k, _)| k.as_str()).collect();
        if failed.is_empty() {
            println!("  seed {}: pass", r.seed);
        } else {
            println!("  seed {}: failed {}", r.seed, failed.join(", "));
        }
    }
    for (k, v) in &m.scenario_flags {
        println!("  {k}: {}", if *v { "pass" } else { "FAIL" });
    }
    println!(
        "  manifest: {}",
        dir.join(pathwise_experiments::MANIFEST_FILE).display()
    );
}

fn run(cli: Cli) -> Result<bool, ExperimentError> {
    let seed = cli.seed.unwrap_or(1);
    let opts = sew_opts(cli.tol);
    let out = cli.out.as_deref();
    match cli.cmd {
        Cmd::Sew { hurst, n } => {
            let grid = TimeGrid::unit(n)?;
            let x = generate_fbm(seed, hurst, grid)?;
            let r = pair_sew(&x, &x, &InnerProduct::euclidean(1), 2.0 * hurst - 0.05, opts)?;
            let got = r.integral.last()[0];
            let want = 0.5 * (x.last()[0].powi(2) - x.first()[0].powi(2));
            write_json(
                out,
                "sew.json",
                &json!({"seed": seed, "hurst": hurst, "n": n, "integral": got, "closed_form": want,
                        "gap": (got - want).abs(), "levels_used": r.sewing.levels_used}),
            )?;
        }
        Cmd::Young { hurst, n, sigma } => {
            let grid = TimeGrid::unit(n)?;
            let x = generate_fbm(seed, hurst, grid)?;
            let (map, want) = match sigma {
                Sigma::Sin => (
                    NemytskiiMap::pointwise(1.0, 1.0, f64::sin),
                    x.first()[0].cos() - x.last()[0].cos(),
                ),
                Sigma::Identity => (
                    NemytskiiMap::identity(),
                    0.5 * (x.last()[0].powi(2) - x.first()[0].powi(2)),
                ),
            };
            let r = abstract_young(&map, &x, &x, MultiplierProduct::Scalar, 2.0, hurst - 0.05, opts)?;
            let got = r.sewn.last()[0];
            write_json(
                out,
                "young.json",
                &json!({"seed": seed, "hurst": hurst, "n": n, "integral": got, "closed_form": want,
                        "gap": (got - want).abs()}),
            )?;
        }
        Cmd::Localtime { hurst, n, bins } => {
            let grid = TimeGrid::unit(n)?;
            let w = generate_fbm(seed, hurst, grid)?;
            let b = SpatialBins::covering(&w, bins, 0.05)?;
            let c = occupation_formula_check(&|z| z * z, &w, n, b)?;
            if let Some(dir) = out {
                std::fs::create_dir_all(dir)?;
                let field = local_time(&w, b)?;
                field.write_csv(std::fs::File::create(dir.join("local_time.csv"))?, (n / 64).max(1))?;
            }
            write_json(
                out,
                "localtime.json",
                &json!({"seed": seed, "hurst": hurst, "n": n, "bins": bins, "time_side": c.time_side,
                        "space_side": c.space_side, "gap": c.gap}),
            )?;
        }
        Cmd::Solve { p, hurst, n, d } => {
            let text = format!("scenario = \"S1\"\nseeds = [{seed}]\np = {p:?}\nhurst = {hurst:?}\nn = {n}\nd = {d}\n");
            let mut cfg = parse_config(&text)?;
            cfg.tolerances.sew_tol = cli.tol;
            let dir = out.map_or_else(|| PathBuf::from("out/solve"), Path::to_path_buf);
            let m = run_scenario(&cfg, &dir)?;
            report(&m, &dir);
            return Ok(m.passed);
        }
        Cmd::Run { config } => {
            let mut cfg = read_config(&config)?;
            if let Some(s) = cli.seed {
                cfg.seeds = vec![s];
            }
            if cli.tol.is_some() {
                cfg.tolerances.sew_tol = cli.tol;
            }
            let dir = out
                .map(Path::to_path_buf)
                .or_else(|| cfg.out.clone())
                .unwrap_or_else(|| PathBuf::from("out"))
                .join(cfg.scenario.as_str());
            let m = run_scenario(&cfg, &dir)?;
            report(&m, &dir);
            return Ok(m.passed);
        }
        Cmd::Table { config } => {
            let mut cfg = read_config(&config)?;
            if cli.tol.is_some() {
                cfg.tolerances.sew_tol = cli.tol;
            }
            let rows = convergence_table(&cfg)?;
            write_table_csv(&rows, std::io::stdout().lock())?;
            if let Some(dir) = out.map(Path::to_path_buf).or(cfg.out) {
                std::fs::create_dir_all(&dir)?;
                write_table_csv(&rows, std::fs::File::create(dir.join("table.csv"))?)?;
            }
        }
        Cmd::Battery => {
            let root = out.map_or_else(|| PathBuf::from("out"), Path::to_path_buf);
            let seeds = cli.seed.map(|s| vec![s]);
            let manifests = run_battery(&root, seeds.as_deref())?;
            for (id, m) in ScenarioId::ALL.iter().zip(&manifests) {
                report(m, &root.join(id.as_str()));
            }
            return Ok(manifests.iter().all(|m| m.passed));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

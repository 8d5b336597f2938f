//! Scenario configuration: a flat TOML table.
//!
//! | key | type | meaning |
//! |-----|------|---------|
//! | `scenario` | string | `S1`..`S6` (required) |
//! | `seeds` | int array | one run per seed |
//! | `n`, `d` | int | time cells, interior space nodes |
//! | `horizon` | float | final time `T` |
//! | `operator` | string | `p_laplace`, `porous_medium` or `zero` |
//! | `p` | float | p-Laplace exponent |
//! | `psi`, `m` | string, float | porous medium nonlinearity `power` (with `m`) or `identity` |
//! | `driver` | string | `additive_fbm`, `young`, `linear_mult` or `reg_by_noise` |
//! | `hurst` | float | Hurst index of the driving fBm |
//! | `modes`, `noise_scale`, `coloring` | int, float, float array | spatial coloring `noise_scale/k` on `modes` sine modes, or explicit |
//! | `sigma` | string | Young nonlinearity `sin` or `identity` |
//! | `eps`, `hurst_w`, `bins` | float, float, int | mollified delta width, Hurst index of `w`, local-time bins |
//! | `gamma`, `q` | float | declared driver regularity `B^γ_{q,∞}` |
//! | `sew_tol`, `newton_tol` | float | numerical tolerances |
//! | `study`, `levels` | string, int array | convergence table: `heat`, `sewing` or `chain_rule` on `n = 2^level` |
//! | `out` | string | output directory |
//!
//! Keys a scenario does not use are rejected, as are unknown keys.

use std::fmt;
use std::path::PathBuf;

use serde::Serialize;
use sha2::{Digest, Sha256};
use toml::{Table, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ScenarioId {
    S1,
    S2,
    S3,
    S4,
    S5,
    S6,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 6] = [Self::S1, Self::S2, Self::S3, Self::S4, Self::S5, Self::S6];

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|id| id.as_str().eq_ignore_ascii_case(s))
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::S1 => "S1",
            Self::S2 => "S2",
            Self::S3 => "S3",
            Self::S4 => "S4",
            Self::S5 => "S5",
            Self::S6 => "S6",
        }
    }

    pub fn title(&self) -> &'static str {
        match self {
            Self::S1 => "p-Laplace with additive fBm",
            Self::S2 => "p-Laplace with Young noise σ(u)dX",
            Self::S3 => "linear multiplicative noise u dβ",
            Self::S4 => "porous medium with additive fBm",
            Self::S5 => "p-Laplace with drift b(u - w) regularized by w",
            Self::S6 => "sewing, Young and chain-rule residual battery",
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiKind {
    Power,
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorSpec {
    PLaplace { p: f64 },
    PorousMedium { psi: PsiKind, m: f64 },
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaKind {
    Sin,
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DriverSpec {
    AdditiveFbm {
        hurst: f64,
        coloring: Vec<f64>,
    },
    Young {
        sigma: SigmaKind,
        hurst: f64,
    },
    LinearMult {
        hurst: f64,
    },
    RegByNoise {
        eps: f64,
        hurst_w: f64,
        bins: usize,
    },
    /// The analysis battery has no driver.
    None,
}

impl DriverSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::AdditiveFbm { .. } => "additive_fbm",
            Self::Young { .. } => "young",
            Self::LinearMult { .. } => "linear_mult",
            Self::RegByNoise { .. } => "reg_by_noise",
            Self::None => "none",
        }
    }

    pub fn hurst(&self) -> Option<f64> {
        match self {
            Self::AdditiveFbm { hurst, .. } | Self::Young { hurst, .. } | Self::LinearMult { hurst } => Some(*hurst),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Study {
    Heat,
    Sewing,
    ChainRule,
}

impl Study {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Heat => "heat",
            Self::Sewing => "sewing",
            Self::ChainRule => "chain_rule",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Sewing tolerance; `None` uses the engine default.
    pub sew_tol: Option<f64>,
    pub newton_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub scenario: ScenarioId,
    pub operator: OperatorSpec,
    pub driver: DriverSpec,
    pub n: usize,
    pub d: usize,
    pub horizon: f64,
    pub seeds: Vec<u64>,
    pub gamma: f64,
    pub q: f64,
    pub tolerances: Tolerances,
    pub study: Study,
    pub levels: Vec<u32>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl ScenarioConfig {
    /// Defaults of a scenario, as produced by `scenario = "<id>"` alone.
    pub fn defaults(id: ScenarioId) -> Self {
        parse_config(&format!("scenario = \"{id}\"")).expect("defaults are valid")
    }

    /// Canonical JSON of every field except the output directory.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Flat TOML that parses back to this configuration.
    pub fn to_toml(&self) -> String {
        let mut t = Table::new();
        t.insert("scenario".into(), self.scenario.as_str().into());
        t.insert(
            "seeds".into(),
            Value::Array(self.seeds.iter().map(|s| Value::Integer(*s as i64)).collect()),
        );
        t.insert("n".into(), Value::Integer(self.n as i64));
        t.insert("d".into(), Value::Integer(self.d as i64));
        t.insert("study".into(), self.study.as_str().into());
        t.insert(
            "levels".into(),
            Value::Array(self.levels.iter().map(|l| Value::Integer(*l as i64)).collect()),
        );
        if let Some(tol) = self.tolerances.sew_tol {
            t.insert("sew_tol".into(), tol.into());
        }
        if let Some(out) = &self.out {
            t.insert("out".into(), out.display().to_string().into());
        }
        if self.scenario != ScenarioId::S6 {
            t.insert("horizon".into(), self.horizon.into());
            t.insert("gamma".into(), self.gamma.into());
            t.insert("q".into(), self.q.into());
            t.insert("newton_tol".into(), self.tolerances.newton_tol.into());
            match &self.operator {
                OperatorSpec::PLaplace { p } => {
                    t.insert("operator".into(), "p_laplace".into());
                    t.insert("p".into(), (*p).into());
                }
                OperatorSpec::PorousMedium { psi, m } => {
                    t.insert("operator".into(), "porous_medium".into());
                    match psi {
                        PsiKind::Power => {
                            t.insert("psi".into(), "power".into());
                            t.insert("m".into(), (*m).into());
                        }
                        PsiKind::Identity => {
                            t.insert("psi".into(), "identity".into());
                        }
                    }
                }
                OperatorSpec::Zero => {
                    t.insert("operator".into(), "zero".into());
                }
            }
            t.insert("driver".into(), self.driver.name().into());
            match &self.driver {
                DriverSpec::AdditiveFbm { hurst, coloring } => {
                    t.insert("hurst".into(), (*hurst).into());
                    t.insert(
                        "coloring".into(),
                        Value::Array(coloring.iter().map(|c| Value::Float(*c)).collect()),
                    );
                }
                DriverSpec::Young { sigma, hurst } => {
                    t.insert("hurst".into(), (*hurst).into());
                    let s = match sigma {
                        SigmaKind::Sin => "sin",
                        SigmaKind::Identity => "identity",
                    };
                    t.insert("sigma".into(), s.into());
                }
                DriverSpec::LinearMult { hurst } => {
                    t.insert("hurst".into(), (*hurst).into());
                }
                DriverSpec::RegByNoise { eps, hurst_w, bins } => {
                    t.insert("eps".into(), (*eps).into());
                    t.insert("hurst_w".into(), (*hurst_w).into());
                    t.insert("bins".into(), Value::Integer(*bins as i64));
                }
                DriverSpec::None => {}
            }
        }
        toml::to_string(&t).expect("flat table serializes")
    }

    /// SHA-256 of [`canonical_json`](Self::canonical_json), hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Every problem found in a configuration, one line each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub violations: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration:")?;
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

const KNOWN_KEYS: &[&str] = &[
    "scenario",
    "seeds",
    "n",
    "d",
    "horizon",
    "operator",
    "p",
    "psi",
    "m",
    "driver",
    "hurst",
    "modes",
    "noise_scale",
    "coloring",
    "sigma",
    "eps",
    "hurst_w",
    "bins",
    "gamma",
    "q",
    "sew_tol",
    "newton_tol",
    "study",
    "levels",
    "out",
];

struct Reader {
    table: Table,
    errors: Vec<String>,
}

impl Reader {
    fn has(&self, key: &str) -> bool {
        self.table.contains_key(key)
    }

    fn float(&mut self, key: &str) -> Option<f64> {
        match self.table.get(key)? {
            Value::Float(x) => Some(*x),
            Value::Integer(i) => Some(*i as f64),
            other => {
                self.errors
                    .push(format!("`{key}` must be a number, got {}", other.type_str()));
                None
            }
        }
    }

    fn int(&mut self, key: &str) -> Option<i64> {
        match self.table.get(key)? {
            Value::Integer(i) => Some(*i),
            other => {
                self.errors
                    .push(format!("`{key}` must be an integer, got {}", other.type_str()));
                None
            }
        }
    }

    fn string(&mut self, key: &str) -> Option<String> {
        match self.table.get(key)? {
            Value::String(s) => Some(s.clone()),
            other => {
                self.errors
                    .push(format!("`{key}` must be a string, got {}", other.type_str()));
                None
            }
        }
    }

    fn float_array(&mut self, key: &str) -> Option<Vec<f64>> {
        let arr = match self.table.get(key)? {
            Value::Array(a) => a.clone(),
            other => {
                self.errors
                    .push(format!("`{key}` must be an array of numbers, got {}", other.type_str()));
                return None;
            }
        };
        let mut out = Vec::with_capacity(arr.len());
        for v in arr {
            match v {
                Value::Float(x) => out.push(x),
                Value::Integer(i) => out.push(i as f64),
                other => {
                    self.errors
                        .push(format!("`{key}` entries must be numbers, got {}", other.type_str()));
                    return None;
                }
            }
        }
        Some(out)
    }

    fn int_array(&mut self, key: &str) -> Option<Vec<i64>> {
        let arr = match self.table.get(key)? {
            Value::Array(a) => a.clone(),
            other => {
                self.errors.push(format!(
                    "`{key}` must be an array of integers, got {}",
                    other.type_str()
                ));
                return None;
            }
        };
        let mut out = Vec::with_capacity(arr.len());
        for v in arr {
            match v {
                Value::Integer(i) => out.push(i),
                other => {
                    self.errors
                        .push(format!("`{key}` entries must be integers, got {}", other.type_str()));
                    return None;
                }
            }
        }
        Some(out)
    }
}

/// Per-scenario defaults before validation.
struct Defaults {
    n: usize,
    d: usize,
    horizon: f64,
    seeds: Vec<u64>,
    operator: &'static str,
    driver: &'static str,
    p: f64,
    m: f64,
    hurst: f64,
    q: f64,
    /// Fixed γ; `None` means `hurst - 0.05`.
    gamma: Option<f64>,
    noise_scale: f64,
}

fn defaults_for(id: ScenarioId) -> Defaults {
    let base = Defaults {
        n: 2048,
        d: 64,
        horizon: 1.0,
        seeds: vec![1, 2, 3],
        operator: "p_laplace",
        driver: "additive_fbm",
        p: 3.0,
        m: 2.0,
        hurst: 0.75,
        q: 10.0,
        gamma: None,
        noise_scale: 1.0,
    };
    match id {
        ScenarioId::S1 => Defaults {
            n: 4096,
            d: 128,
            seeds: vec![1, 2, 3, 4, 5],
            ..base
        },
        ScenarioId::S2 => Defaults {
            driver: "young",
            hurst: 0.9,
            q: 4.0,
            ..base
        },
        ScenarioId::S3 => Defaults {
            driver: "linear_mult",
            p: 2.0,
            hurst: 0.85,
            q: 4.0,
            ..base
        },
        ScenarioId::S4 => Defaults {
            operator: "porous_medium",
            noise_scale: 0.1,
            ..base
        },
        ScenarioId::S5 => Defaults {
            driver: "reg_by_noise",
            gamma: Some(0.95),
            ..base
        },
        ScenarioId::S6 => Defaults {
            seeds: vec![1],
            operator: "zero",
            driver: "none",
            ..base
        },
    }
}

fn keys_used_by(id: ScenarioId, operator: &str, driver: &str) -> Vec<&'static str> {
    let mut keys = vec!["scenario", "seeds", "sew_tol", "study", "levels", "out", "n", "d"];
    if id == ScenarioId::S6 {
        return keys;
    }
    keys.extend(["horizon", "operator", "driver", "gamma", "q", "newton_tol"]);
    match operator {
        "p_laplace" => keys.push("p"),
        "porous_medium" => keys.extend(["psi", "m"]),
        _ => {}
    }
    match driver {
        "additive_fbm" => keys.extend(["hurst", "modes", "noise_scale", "coloring"]),
        "young" => keys.extend(["hurst", "sigma"]),
        "linear_mult" => keys.push("hurst"),
        "reg_by_noise" => keys.extend(["eps", "hurst_w", "bins"]),
        _ => {}
    }
    keys
}

fn in_unit_interval(x: f64) -> bool {
    x > 0.0 && x < 1.0
}

/// Parses and validates a configuration, filling scenario defaults.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| ConfigError {
        violations: vec![format!("not valid TOML: {}", e.message())],
    })?;
    let mut r = Reader {
        table,
        errors: Vec::new(),
    };
    let mut unknown: Vec<String> = r
        .table
        .keys()
        .filter(|k| !KNOWN_KEYS.contains(&k.as_str()))
        .map(|k| format!("unknown key `{k}`"))
        .collect();

    let id = match r.string("scenario") {
        Some(s) => match ScenarioId::parse(&s) {
            Some(id) => Some(id),
            None => {
                r.errors.push(format!("`scenario` must be one of S1..S6, got \"{s}\""));
                None
            }
        },
        None => {
            if !r.has("scenario") {
                r.errors.push("missing key `scenario`".into());
            }
            None
        }
    };
    let Some(id) = id else {
        unknown.append(&mut r.errors);
        return Err(ConfigError { violations: unknown });
    };
    let def = defaults_for(id);

    let operator_name = r.string("operator").unwrap_or_else(|| def.operator.to_string());
    let driver_name = r.string("driver").unwrap_or_else(|| def.driver.to_string());
    let used = keys_used_by(id, &operator_name, &driver_name);
    for k in r.table.keys() {
        if KNOWN_KEYS.contains(&k.as_str()) && !used.contains(&k.as_str()) {
            unknown.push(format!(
                "key `{k}` is not used by scenario {id} with operator {operator_name} and driver {driver_name}"
            ));
        }
    }
    let mut errors = unknown;

    let n = r.int("n").map_or(def.n as i64, |v| v);
    let d = r.int("d").map_or(def.d as i64, |v| v);
    let horizon = r.float("horizon").unwrap_or(def.horizon);
    let seeds: Vec<i64> = r
        .int_array("seeds")
        .unwrap_or_else(|| def.seeds.iter().map(|s| *s as i64).collect());
    let p = r.float("p").unwrap_or(def.p);
    let m = r.float("m").unwrap_or(def.m);
    let psi = r.string("psi").unwrap_or_else(|| "power".into());
    let hurst = r.float("hurst").unwrap_or(def.hurst);
    let modes = r.int("modes").unwrap_or(16);
    let noise_scale = r.float("noise_scale").unwrap_or(def.noise_scale);
    let coloring = r.float_array("coloring");
    let sigma = r.string("sigma").unwrap_or_else(|| "sin".into());
    let eps = r.float("eps").unwrap_or(0.1);
    let hurst_w = r.float("hurst_w").unwrap_or(0.3);
    let bins = r.int("bins").unwrap_or(512);
    let q = r.float("q").unwrap_or(def.q);
    let gamma = r.float("gamma").unwrap_or_else(|| def.gamma.unwrap_or(hurst - 0.05));
    let sew_tol = r.float("sew_tol");
    let newton_tol = r.float("newton_tol").unwrap_or(1e-12);
    let study = r.string("study").unwrap_or_else(|| "heat".into());
    let levels = r.int_array("levels").unwrap_or_else(|| vec![9, 10, 11]);
    let out = r.string("out").map(PathBuf::from);
    errors.append(&mut r.errors);

    if n < 16 {
        errors.push(format!("`n` must be at least 16, got {n}"));
    }
    if d < 1 {
        errors.push(format!("`d` must be at least 1, got {d}"));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        errors.push(format!("`horizon` must be positive, got {horizon}"));
    }
    if seeds.is_empty() {
        errors.push("`seeds` must not be empty".into());
    }
    if seeds.iter().any(|s| *s < 0) {
        errors.push("`seeds` must be nonnegative".into());
    }
    if let Some(t) = sew_tol {
        if !(t > 0.0) {
            errors.push(format!("`sew_tol` must be positive, got {t}"));
        }
    }
    if !(newton_tol > 0.0) {
        errors.push(format!("`newton_tol` must be positive, got {newton_tol}"));
    }
    let study = match study.as_str() {
        "heat" => Some(Study::Heat),
        "sewing" => Some(Study::Sewing),
        "chain_rule" => Some(Study::ChainRule),
        other => {
            errors.push(format!("`study` must be heat, sewing or chain_rule, got \"{other}\""));
            None
        }
    };
    if levels.len() < 3 {
        errors.push(format!(
            "`levels` needs at least 3 refinement levels, got {}",
            levels.len()
        ));
    }
    if levels.iter().any(|l| !(3..=20).contains(l)) || levels.windows(2).any(|w| w[1] <= w[0]) {
        errors.push("`levels` must increase strictly and lie in 3..=20".into());
    }

    let operator = if id == ScenarioId::S6 {
        Some(OperatorSpec::Zero)
    } else {
        match operator_name.as_str() {
            "p_laplace" => {
                if !(p > 1.0) {
                    errors.push(format!("`p` must exceed 1, got {p}"));
                }
                Some(OperatorSpec::PLaplace { p })
            }
            "porous_medium" => match psi.as_str() {
                "power" => {
                    if !(m >= 1.0) {
                        errors.push(format!("`m` must be at least 1, got {m}"));
                    }
                    Some(OperatorSpec::PorousMedium { psi: PsiKind::Power, m })
                }
                "identity" => Some(OperatorSpec::PorousMedium {
                    psi: PsiKind::Identity,
                    m: 1.0,
                }),
                other => {
                    errors.push(format!("`psi` must be power or identity, got \"{other}\""));
                    None
                }
            },
            "zero" => Some(OperatorSpec::Zero),
            other => {
                errors.push(format!(
                    "`operator` must be p_laplace, porous_medium or zero, got \"{other}\""
                ));
                None
            }
        }
    };

    let hurst_ok = |x: f64, key: &str, errors: &mut Vec<String>| {
        if !in_unit_interval(x) {
            errors.push(format!("`{key}` = {x}: Hurst in (0,1)"));
        }
    };
    let driver = if id == ScenarioId::S6 {
        Some(DriverSpec::None)
    } else {
        match driver_name.as_str() {
            "additive_fbm" => {
                hurst_ok(hurst, "hurst", &mut errors);
                let coloring = match coloring {
                    Some(c) => c,
                    None => {
                        if modes < 1 {
                            errors.push(format!("`modes` must be at least 1, got {modes}"));
                        }
                        (1..=modes.max(1)).map(|k| noise_scale / k as f64).collect()
                    }
                };
                if coloring.is_empty() || coloring.iter().any(|c| !c.is_finite()) {
                    errors.push("`coloring` must be a nonempty list of finite numbers".into());
                }
                if coloring.len() as i64 > d {
                    errors.push(format!("{} coloring modes exceed d = {d} sine modes", coloring.len()));
                }
                Some(DriverSpec::AdditiveFbm { hurst, coloring })
            }
            "young" => {
                hurst_ok(hurst, "hurst", &mut errors);
                let sigma = match sigma.as_str() {
                    "sin" => Some(SigmaKind::Sin),
                    "identity" => Some(SigmaKind::Identity),
                    other => {
                        errors.push(format!("`sigma` must be sin or identity, got \"{other}\""));
                        None
                    }
                };
                sigma.map(|sigma| DriverSpec::Young { sigma, hurst })
            }
            "linear_mult" => {
                hurst_ok(hurst, "hurst", &mut errors);
                Some(DriverSpec::LinearMult { hurst })
            }
            "reg_by_noise" => {
                hurst_ok(hurst_w, "hurst_w", &mut errors);
                if !(eps > 0.0 && eps.is_finite()) {
                    errors.push(format!("`eps` = {eps}: mollification must be positive"));
                }
                if bins < 2 {
                    errors.push(format!("`bins` must be at least 2, got {bins}"));
                }
                Some(DriverSpec::RegByNoise {
                    eps,
                    hurst_w,
                    bins: bins.max(2) as usize,
                })
            }
            other => {
                errors.push(format!(
                    "`driver` must be additive_fbm, young, linear_mult or reg_by_noise, got \"{other}\""
                ));
                None
            }
        }
    };

    if id != ScenarioId::S6 {
        check_regime(id, &operator_name, &driver_name, gamma, q, hurst, &mut errors);
    }

    match (operator, driver, study) {
        (Some(operator), Some(driver), Some(study)) if errors.is_empty() => Ok(ScenarioConfig {
            scenario: id,
            operator,
            driver,
            n: n as usize,
            d: d as usize,
            horizon,
            seeds: seeds.into_iter().map(|s| s as u64).collect(),
            gamma,
            q,
            tolerances: Tolerances { sew_tol, newton_tol },
            study,
            levels: levels.into_iter().map(|l| l as u32).collect(),
            out,
        }),
        _ => Err(ConfigError { violations: errors }),
    }
}

/// Hypotheses under which each scenario's well-posedness statement holds.
fn check_regime(
    id: ScenarioId,
    operator: &str,
    driver: &str,
    gamma: f64,
    q: f64,
    hurst: f64,
    errors: &mut Vec<String>,
) {
    let (want_op, want_driver): (&[&str], &str) = match id {
        ScenarioId::S1 => (&["p_laplace", "zero"], "additive_fbm"),
        ScenarioId::S2 => (&["p_laplace"], "young"),
        ScenarioId::S3 => (&["p_laplace", "zero"], "linear_mult"),
        ScenarioId::S4 => (&["porous_medium"], "additive_fbm"),
        ScenarioId::S5 => (&["p_laplace"], "reg_by_noise"),
        ScenarioId::S6 => return,
    };
    if !want_op.contains(&operator) {
        errors.push(format!("{id} runs operator {}, got {operator}", want_op.join(" or ")));
    }
    if driver != want_driver {
        errors.push(format!("{id} runs driver {want_driver}, got {driver}"));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        errors.push(format!("`gamma` must lie in (0, 1], got {gamma}"));
    }
    if !(q > 2.0) {
        errors.push(format!("`q` must exceed 2, got {q}"));
    }
    match id {
        ScenarioId::S1 | ScenarioId::S4 => {
            if !(gamma > 0.5) {
                errors.push(format!("additive driver needs γ > 1/2, got γ = {gamma}"));
            }
        }
        ScenarioId::S2 => {
            if !(gamma > 0.75) {
                errors.push(format!(
                    "Young driver σ(u)dX needs γ > 3/4 with X ∈ C^γ, got γ = {gamma}"
                ));
            }
        }
        ScenarioId::S3 => {
            if !(gamma > 0.5) {
                errors.push(format!("linear multiplicative driver needs γ > 1/2, got γ = {gamma}"));
            }
        }
        ScenarioId::S5 => {
            if !(gamma > 0.75) {
                errors.push(format!(
                    "regularization by noise needs b∗L^w ∈ C^γ with γ > 3/4, got γ = {gamma}"
                ));
            }
        }
        ScenarioId::S6 => {}
    }
    if matches!(id, ScenarioId::S2 | ScenarioId::S3 | ScenarioId::S5) && !(gamma + 1.0 / q > 1.0) {
        errors.push(format!("sewing the driver needs γ + 1/q > 1, got γ = {gamma}, q = {q}"));
    }
    if !(gamma > 0.5 + 1.0 / q) {
        errors.push(format!(
            "solver admission needs γ > 1/2 + 1/q, got γ = {gamma}, q = {q}"
        ));
    }
    if driver != "reg_by_noise" && in_unit_interval(hurst) && !(gamma < hurst) {
        errors.push(format!(
            "declared γ = {gamma} must lie below the Hurst index H = {hurst}"
        ));
    }
}

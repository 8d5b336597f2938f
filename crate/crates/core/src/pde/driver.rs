use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid_paths::{
    besov_seminorm, holder_seminorm, linf_norm, lp_norm, mollify_path, BesovIndex, InnerProduct, SampledPath, TimeGrid,
};
use crate::occupation::{local_time, DriftGerm, DriftSpec, LocalTimeField, SpatialBins};
use crate::sewing::{fit_slope, sew_with, SewOptions};
use crate::young::{abstract_young, MultiplierProduct, NemytskiiMap};

#[derive(Debug, Clone)]
pub enum DriverKind {
    Zero {
        grid: TimeGrid,
        dim: usize,
    },
    /// `I_t(u) = Z_t - Z_{t0}`.
    Additive {
        z: SampledPath,
    },
    /// `I_t(u) = ∫ u dβ` for a scalar `β`.
    LinearMultiplicative {
        beta: SampledPath,
    },
    /// `I_t(u) = ∫ σ(u) dX`.
    AbstractYoung {
        sigma: NemytskiiMap,
        x: SampledPath,
        product: MultiplierProduct,
    },
    /// `I_t(u) = ∫ b(u_r - w_r) dr` through the local time of `w`.
    RegularizedDrift {
        drift: DriftSpec,
        w: SampledPath,
        field: LocalTimeField,
    },
}

/// Integral operator `u ↦ I(u)` with its regularity pair `(γ, q)`.
#[derive(Debug, Clone)]
pub struct DriverOperator {
    kind: DriverKind,
    gamma: f64,
    q: f64,
    c4: Option<f64>,
    approximant_level: Option<u32>,
}

impl DriverOperator {
    fn build(kind: DriverKind, gamma: f64, q: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) || !(q > 2.0) {
            return Err(invalid(format!(
                "driver regularity needs γ ∈ (0,1] and q ∈ (2,∞], got γ={gamma}, q={q}"
            )));
        }
        Ok(Self {
            kind,
            gamma,
            q,
            c4: None,
            approximant_level: None,
        })
    }

    pub fn zero(grid: TimeGrid, dim: usize) -> Self {
        Self::build(DriverKind::Zero { grid, dim }, 1.0, f64::INFINITY).expect("valid regularity")
    }

    pub fn additive(z: SampledPath, gamma: f64, q: f64) -> Result<Self> {
        Self::build(DriverKind::Additive { z }, gamma, q)
    }

    pub fn linear_multiplicative(beta: SampledPath, gamma: f64, q: f64) -> Result<Self> {
        if beta.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                actual: beta.dim(),
                context: "multiplicative driver β",
            });
        }
        Self::build(DriverKind::LinearMultiplicative { beta }, gamma, q)
    }

    pub fn abstract_young(
        sigma: NemytskiiMap,
        x: SampledPath,
        product: MultiplierProduct,
        gamma: f64,
        q: f64,
    ) -> Result<Self> {
        Self::build(DriverKind::AbstractYoung { sigma, x, product }, gamma, q)
    }

    pub fn regularized_drift(drift: DriftSpec, w: SampledPath, bins: SpatialBins, gamma: f64, q: f64) -> Result<Self> {
        if w.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                actual: w.dim(),
                context: "drift noise w",
            });
        }
        let field = local_time(&w, bins)?;
        Self::build(DriverKind::RegularizedDrift { drift, w, field }, gamma, q)
    }

    pub fn with_c4(mut self, c4: f64) -> Self {
        self.c4 = Some(c4);
        self
    }

    pub fn kind(&self) -> &DriverKind {
        &self.kind
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn c4(&self) -> Option<f64> {
        self.c4
    }

    pub fn approximant_level(&self) -> Option<u32> {
        self.approximant_level
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            DriverKind::Zero { .. } => "zero",
            DriverKind::Additive { .. } => "additive",
            DriverKind::LinearMultiplicative { .. } => "linear-multiplicative",
            DriverKind::AbstractYoung { .. } => "abstract-young",
            DriverKind::RegularizedDrift { .. } => "regularized-drift",
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        match &self.kind {
            DriverKind::Zero { grid, .. } => grid,
            DriverKind::Additive { z } => z.grid(),
            DriverKind::LinearMultiplicative { beta } => beta.grid(),
            DriverKind::AbstractYoung { x, .. } => x.grid(),
            DriverKind::RegularizedDrift { w, .. } => w.grid(),
        }
    }

    /// Solver admission: `q > 2` and `γ > 1/2 + 1/q`.
    pub fn check_admissible(&self) -> Result<()> {
        if self.gamma > 0.5 + 1.0 / self.q {
            Ok(())
        } else {
            Err(invalid(format!(
                "driver not admissible: need γ > 1/2 + 1/q, got γ={}, q={}",
                self.gamma, self.q
            )))
        }
    }

    /// Checks that the driver acts on `H = R^d`.
    pub fn check_dim(&self, d: usize) -> Result<()> {
        let (expected, actual, context) = match &self.kind {
            DriverKind::Zero { dim, .. } => (d, *dim, "zero driver dimension"),
            DriverKind::Additive { z } => (d, z.dim(), "additive driver dimension"),
            DriverKind::AbstractYoung { x, product, .. } => (product.e_dim(d), x.dim(), "Young driver E-dimension"),
            _ => return Ok(()),
        };
        if expected != actual {
            return Err(Error::DimensionMismatch {
                expected,
                actual,
                context,
            });
        }
        Ok(())
    }

    /// The approximant `Iⁿ`: every driving signal replaced by its
    /// piecewise-linear interpolant on `2^level` cells.
    pub fn approximant(&self, level: u32) -> Result<Self> {
        let kind = match &self.kind {
            DriverKind::Zero { .. } => self.kind.clone(),
            DriverKind::Additive { z } => DriverKind::Additive {
                z: mollify_path(z, level)?,
            },
            DriverKind::LinearMultiplicative { beta } => DriverKind::LinearMultiplicative {
                beta: mollify_path(beta, level)?,
            },
            DriverKind::AbstractYoung { sigma, x, product } => DriverKind::AbstractYoung {
                sigma: sigma.clone(),
                x: mollify_path(x, level)?,
                product: *product,
            },
            DriverKind::RegularizedDrift { drift, w, field } => {
                let wn = mollify_path(w, level)?;
                let field = local_time(&wn, *field.bins())?;
                DriverKind::RegularizedDrift {
                    drift: drift.clone(),
                    w: wn,
                    field,
                }
            }
        };
        Ok(Self {
            kind,
            approximant_level: Some(level),
            ..self.clone()
        })
    }

    /// Increment over nodes `s..t` with the state frozen at `u_s`:
    /// `Z_t - Z_s`, `u_s(β_t - β_s)`, `σ(u_s)(X_t - X_s)` or
    /// `Σ_j Δt b(u_s - z_{c_j})`.
    pub fn increment_frozen(&self, u_s: &[f64], s: usize, t: usize) -> Result<Vec<f64>> {
        let n = self.grid().n();
        if s > t || t > n {
            return Err(invalid(format!("increment nodes {s}..{t} outside 0..={n}")));
        }
        let d = u_s.len();
        let mut out = vec![0.0; d];
        match &self.kind {
            DriverKind::Zero { .. } => {}
            DriverKind::Additive { z } => {
                for ((o, a), b) in out.iter_mut().zip(z.row(t)).zip(z.row(s)) {
                    *o = a - b;
                }
            }
            DriverKind::LinearMultiplicative { beta } => {
                let db = beta.row(t)[0] - beta.row(s)[0];
                for (o, u) in out.iter_mut().zip(u_s) {
                    *o = u * db;
                }
            }
            DriverKind::AbstractYoung { sigma, x, product } => {
                let mut su = vec![0.0; d];
                sigma.apply(u_s, &mut su);
                let dx: Vec<f64> = x.row(t).iter().zip(x.row(s)).map(|(a, b)| a - b).collect();
                product.apply(&su, &dx, &mut out);
            }
            DriverKind::RegularizedDrift { drift, field, .. } => {
                let dt = self.grid().dt();
                for j in s..t {
                    let z = field.bins().center(field.cell_bin(j));
                    for (o, u) in out.iter_mut().zip(u_s) {
                        *o += dt * drift.eval(u - z);
                    }
                }
            }
        }
        Ok(out)
    }

    /// The full path `I(u)`, zero at `t0`, by sewing where needed.
    pub fn integral(&self, u: &SampledPath, opts: SewOptions) -> Result<SampledPath> {
        if u.grid() != self.grid() {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", u.grid(), self.grid())));
        }
        self.check_dim(u.dim())?;
        match &self.kind {
            DriverKind::Zero { .. } => Ok(SampledPath::zeros(*u.grid(), u.dim())),
            DriverKind::Additive { z } => Ok(z.pinned()),
            DriverKind::LinearMultiplicative { beta } => Ok(abstract_young(
                &NemytskiiMap::identity(),
                u,
                beta,
                MultiplierProduct::Scalar,
                self.q,
                self.gamma,
                opts,
            )?
            .sewn),
            DriverKind::AbstractYoung { sigma, x, product } => {
                Ok(abstract_young(sigma, u, x, *product, self.q, self.gamma, opts)?.sewn)
            }
            DriverKind::RegularizedDrift { drift, field, .. } => {
                let germ = DriftGerm::new(drift, field, u, true, self.gamma)?;
                Ok(sew_with(&germ, u.grid(), opts)?.sewn)
            }
        }
    }
}

/// Increment of `I` over nodes `s..t` given the history `u` on `[t0, t_s]`.
/// The state is frozen at `u_s`, which is the explicit splitting used by
/// the solver; for `u` constant on `[t_s, t_t]` this is the exact increment.
pub fn driver_increment(driver: &DriverOperator, history: &SampledPath, s: usize, t: usize) -> Result<Vec<f64>> {
    let g = driver.grid();
    let h = history.grid();
    if h.t0() != g.t0() || (h.dt() - g.dt()).abs() > 1e-12 * g.dt() || h.n() > g.n() {
        return Err(Error::GridMismatch(format!("history {h:?} is not a prefix of {g:?}")));
    }
    if s > h.n() {
        return Err(invalid(format!("history ends at node {} before s={s}", h.n())));
    }
    driver.increment_frozen(history.row(s), s, t)
}

#[derive(Debug, Clone, Serialize)]
pub struct H5Row {
    pub window_nodes: usize,
    pub r: f64,
    /// `max_w ⟦I(u)⟧²_{B^γ_{q,∞}(w)}` over the windows of this length.
    pub lhs: f64,
    /// `⟦u⟧²_{B^{1/2}_{2,∞}(w)} + ‖u‖²_{L∞(w)}` on the maximizing window.
    pub u_term: f64,
    /// `max_w lhs_w / (c4·u_term_w)`.
    pub lambda: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct H5Table {
    pub c4: f64,
    pub rows: Vec<H5Row>,
    /// `⟦I(u)⟧_{B^γ_{q,∞}}` over the whole interval.
    pub global_seminorm: f64,
    /// For Young drivers: `global_seminorm / (C_σ ⟦X⟧_{C^γ}(1 + ‖u‖_∞ + ⟦u⟧_{B^{1/2}_{2,∞}}))`.
    pub young_constant: Option<f64>,
}

impl H5Table {
    /// `λ(r_min)/λ(r_max)`.
    pub fn decay_ratio(&self) -> f64 {
        let first = self.rows.iter().max_by_key(|r| r.window_nodes);
        let last = self.rows.iter().min_by_key(|r| r.window_nodes);
        match (first, last) {
            (Some(a), Some(b)) if a.lambda > 0.0 => b.lambda / a.lambda,
            _ => 0.0,
        }
    }

    /// Least-squares power law `λ(r) ≈ a r^κ` through the rows with finite
    /// positive `λ`, returned as `(a, κ)`.
    pub fn power_fit(&self) -> Option<(f64, f64)> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.lambda > 0.0 && r.lambda.is_finite())
            .map(|r| (r.r.ln(), r.lambda.ln()))
            .collect();
        let kappa = fit_slope(&pts)?;
        let m = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        Some(((sy / m - kappa * sx / m).exp(), kappa))
    }

    /// Fitted `λ(r_small)/λ(r_large)`.
    pub fn fitted_ratio(&self, r_small: f64, r_large: f64) -> Option<f64> {
        self.power_fit().map(|(_, k)| (r_small / r_large).powf(k))
    }

    /// `λ` nonincreasing as windows shrink, up to a relative `slack`.
    pub fn shrinking(&self, slack: f64) -> bool {
        let mut rows: Vec<&H5Row> = self.rows.iter().collect();
        rows.sort_by_key(|r| std::cmp::Reverse(r.window_nodes));
        rows.windows(2).all(|p| p[1].lambda <= p[0].lambda * (1.0 + slack))
    }
}

/// Window diagnostic for the time-local boundedness of `I`: for every length
/// in `windows` (in grid nodes) the disjoint windows `[kL, (k+1)L]` are
/// scanned. `c4` defaults to 1 when the driver declares none; only ratios
/// of `λ` are meaningful then.
pub fn h5_diagnostic(
    driver: &DriverOperator,
    u: &SampledPath,
    ip: &InnerProduct,
    windows: &[usize],
    opts: SewOptions,
) -> Result<H5Table> {
    let integral = driver.integral(u, opts)?;
    let n = u.grid().n();
    let c4 = driver.c4.unwrap_or(1.0);
    let idx = BesovIndex::new(driver.gamma, driver.q)?;
    let half = BesovIndex::new(0.5, 2.0)?;
    let mut rows = Vec::with_capacity(windows.len());
    for &len in windows {
        if len == 0 || len > n {
            return Err(invalid(format!("window of {len} nodes does not fit a grid with n={n}")));
        }
        let mut best = H5Row {
            window_nodes: len,
            r: len as f64 * u.grid().dt(),
            lhs: 0.0,
            u_term: 0.0,
            lambda: 0.0,
        };
        let mut s = 0;
        while s + len <= n {
            let iw = integral.restrict(s, s + len)?;
            let uw = u.restrict(s, s + len)?;
            let lhs = besov_seminorm(&iw, idx, ip)?.powi(2);
            let u_term = besov_seminorm(&uw, half, ip)?.powi(2) + linf_norm(&uw, ip)?.powi(2);
            let lambda = if u_term > 0.0 {
                lhs / (c4 * u_term)
            } else if lhs == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            if lhs > best.lhs {
                best.lhs = lhs;
            }
            if lambda > best.lambda {
                best.lambda = lambda;
                best.u_term = u_term;
            }
            s += len;
        }
        rows.push(best);
    }
    let global_seminorm = besov_seminorm(&integral, idx, ip)?;
    let young_constant = match &driver.kind {
        DriverKind::AbstractYoung { sigma, x, product } => {
            let mut xnorm: f64 = 0.0;
            for c in 0..product.e_dim(u.dim()) {
                let comp = SampledPath::scalar(*x.grid(), x.component(c))?;
                xnorm = xnorm.max(holder_seminorm(&comp, driver.gamma, &InnerProduct::euclidean(1))?);
            }
            let scale = sigma.growth() * xnorm * (1.0 + linf_norm(u, ip)? + besov_seminorm(u, half, ip)?);
            Some(if scale > 0.0 { global_seminorm / scale } else { 0.0 })
        }
        _ => None,
    };
    Ok(H5Table {
        c4,
        rows,
        global_seminorm,
        young_constant,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct H6Row {
    pub index: usize,
    pub level: Option<u32>,
    /// `‖uⁿ - u‖_{L²H}`.
    pub l2_distance: f64,
    pub linf: f64,
    pub besov_half: f64,
    /// `‖Iⁿ(uⁿ) - I(u)‖_{B^{γ̄}_{2,∞}H}`.
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct H6Table {
    pub gamma_bar: f64,
    pub rows: Vec<H6Row>,
}

impl H6Table {
    pub fn gaps_decreasing(&self) -> bool {
        self.rows.windows(2).all(|p| p[1].gap <= p[0].gap)
    }

    pub fn final_gap(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.gap)
    }
}

/// Continuity diagnostic along `u_seq[i]` with approximant level
/// `levels[i]` (`None` meaning the exact driver), measured against `I(u)`
/// in `B^{γ̄}_{2,∞}H = L²H ∩ ⟦·⟧_{γ̄,2}`.
pub fn h6_diagnostic(
    driver: &DriverOperator,
    u_seq: &[SampledPath],
    levels: &[Option<u32>],
    u_limit: &SampledPath,
    gamma_bar: f64,
    ip: &InnerProduct,
    opts: SewOptions,
) -> Result<H6Table> {
    if u_seq.len() != levels.len() {
        return Err(invalid(format!(
            "{} paths but {} approximant levels",
            u_seq.len(),
            levels.len()
        )));
    }
    if !(gamma_bar > 0.5 && gamma_bar <= driver.gamma) {
        return Err(invalid(format!("γ̄ must lie in (1/2, γ], got {gamma_bar}")));
    }
    let limit = driver.integral(u_limit, opts)?;
    let idx = BesovIndex::new(gamma_bar, 2.0)?;
    let half = BesovIndex::new(0.5, 2.0)?;
    let mut rows = Vec::with_capacity(u_seq.len());
    for (i, (un, level)) in u_seq.iter().zip(levels).enumerate() {
        let approx = match level {
            Some(l) => driver.approximant(*l)?,
            None => driver.clone(),
        };
        let diff = approx.integral(un, opts)?.sub(&limit)?;
        rows.push(H6Row {
            index: i,
            level: *level,
            l2_distance: lp_norm(&un.sub(u_limit)?, 2.0, ip)?,
            linf: linf_norm(un, ip)?,
            besov_half: besov_seminorm(un, half, ip)?,
            gap: lp_norm(&diff, 2.0, ip)? + besov_seminorm(&diff, idx, ip)?,
        });
    }
    Ok(H6Table { gamma_bar, rows })
}

use crate::error::{Error, Result};
use crate::grid_paths::{
    besov_seminorm, lp_norm, whiten_path, BesovIndex, InnerProduct, PathIntegrator, SampledPath, TimeGrid,
};
use crate::sewing::{sew_with, Germ, SewOptions, SewingResult};

/// Integrand `u`, integrator `I`, the pivot inner product and the declared
/// regularity `u ∈ B^α_{p,∞}`, `I ∈ B^β_{q,∞}`.
#[derive(Debug, Clone)]
pub struct YoungPairInput {
    pub u: SampledPath,
    pub integrator: SampledPath,
    pub ip: InnerProduct,
    pub alpha: f64,
    pub p: f64,
    pub beta: f64,
    pub q: f64,
}

pub(crate) fn check_same_grid(a: &SampledPath, b: &SampledPath) -> Result<()> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch(format!("{:?} vs {:?}", a.grid(), b.grid())));
    }
    Ok(())
}

impl YoungPairInput {
    pub fn new(
        u: SampledPath,
        integrator: SampledPath,
        ip: InnerProduct,
        (alpha, p): (f64, f64),
        (beta, q): (f64, f64),
    ) -> Result<Self> {
        check_same_grid(&u, &integrator)?;
        ip.check_dim(u.dim())?;
        ip.check_dim(integrator.dim())?;
        Ok(Self {
            u,
            integrator,
            ip,
            alpha,
            p,
            beta,
            q,
        })
    }

    /// `1/μ = 1/p + 1/q`.
    pub fn inv_mu(&self) -> f64 {
        1.0 / self.p + 1.0 / self.q
    }

    /// `α + β > 1 ∨ 1/μ`, from the declared indices only.
    pub fn check_eligibility(&self) -> Result<()> {
        let need = self.inv_mu().max(1.0);
        if !(self.alpha > 0.0 && self.alpha < 1.0 && self.beta > 0.0) {
            return Err(Error::YoungIneligible(format!(
                "need α ∈ (0,1) and β > 0, got α={}, β={}",
                self.alpha, self.beta
            )));
        }
        if !(self.p >= 1.0 && self.q >= 1.0) {
            return Err(Error::YoungIneligible(format!(
                "need p, q ≥ 1, got p={}, q={}",
                self.p, self.q
            )));
        }
        if !(self.alpha + self.beta > need) {
            return Err(Error::YoungIneligible(format!(
                "α + β = {} must exceed {need}",
                self.alpha + self.beta
            )));
        }
        Ok(())
    }
}

/// `(u_s, I_t - I_s)_H` on piecewise-linear interpolants, or the averaged
/// variant `(⟨u⟩_{s,t}, I_t - I_s)_H`. Both paths are stored whitened so the
/// pairing is a Euclidean dot product.
#[derive(Debug, Clone)]
pub struct PairingGerm {
    u: SampledPath,
    integrator: SampledPath,
    averaged: Option<PathIntegrator>,
    alpha: f64,
    gamma: f64,
}

impl PairingGerm {
    /// Left-point germ with declared `A`-regularity `beta` and `δA`-regularity
    /// `gamma`.
    pub fn left_point(u: &SampledPath, i: &SampledPath, ip: &InnerProduct, beta: f64, gamma: f64) -> Result<Self> {
        check_same_grid(u, i)?;
        let grid = *u.grid();
        let wu = SampledPath::new(grid, u.dim(), whiten_path(u, ip)?)?;
        let wi = SampledPath::new(grid, i.dim(), whiten_path(i, ip)?)?;
        Ok(Self {
            u: wu,
            integrator: wi,
            averaged: None,
            alpha: beta,
            gamma,
        })
    }

    pub fn averaged(u: &SampledPath, i: &SampledPath, ip: &InnerProduct, beta: f64, gamma: f64) -> Result<Self> {
        let mut g = Self::left_point(u, i, ip, beta, gamma)?;
        g.averaged = Some(PathIntegrator::new(&g.u));
        Ok(g)
    }
}

impl Germ for PairingGerm {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, s: f64, t: f64, out: &mut [f64]) {
        let d = self.u.dim();
        let mut us = vec![0.0; d];
        match &self.averaged {
            Some(integ) => integ.average_into(s, t, &mut us),
            None => self.u.eval_into(s, &mut us),
        }
        let mut is = vec![0.0; d];
        let mut it = vec![0.0; d];
        self.integrator.eval_into(s, &mut is);
        self.integrator.eval_into(t, &mut it);
        out[0] = us.iter().zip(it.iter().zip(&is)).map(|(a, (b, c))| a * (b - c)).sum();
    }

    fn declared_alpha(&self) -> f64 {
        self.alpha
    }

    fn declared_gamma(&self) -> f64 {
        self.gamma
    }
}

#[derive(Debug, Clone)]
pub struct PairingResult {
    /// Scalar path `t ↦ 𝓢_t(u, dI)`, zero at `t0`.
    pub integral: SampledPath,
    pub sewing: SewingResult,
}

/// Sews the left-point pairing germ without an eligibility check.
pub fn pair_sew(
    u: &SampledPath,
    i: &SampledPath,
    ip: &InnerProduct,
    gamma: f64,
    opts: SewOptions,
) -> Result<PairingResult> {
    let germ = PairingGerm::left_point(u, i, ip, 1.0, gamma)?;
    let sewing = sew_with(&germ, u.grid(), opts)?;
    Ok(PairingResult {
        integral: sewing.sewn.clone(),
        sewing,
    })
}

/// Young integral `𝓢(u, dI)` after checking the declared indices.
pub fn young_pairing(input: &YoungPairInput, opts: SewOptions) -> Result<PairingResult> {
    input.check_eligibility()?;
    let germ = PairingGerm::left_point(
        &input.u,
        &input.integrator,
        &input.ip,
        input.beta,
        input.alpha + input.beta,
    )?;
    let sewing = sew_with(&germ, input.u.grid(), opts)?;
    Ok(PairingResult {
        integral: sewing.sewn.clone(),
        sewing,
    })
}

/// Measured sides of `⟦𝓢⟧_{B^β_{μ,∞}} ≲ ‖u‖_{B^α_{p,∞}H} ⟦I⟧_{B^β_{q,∞}H}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityAudit {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, the realized constant.
    pub ratio: f64,
}

pub fn young_stability_audit(input: &YoungPairInput, integral: &SampledPath) -> Result<StabilityAudit> {
    let mu = 1.0 / input.inv_mu();
    let beta = input.beta.min(1.0);
    let lhs = besov_seminorm(integral, BesovIndex::new(beta, mu)?, &InnerProduct::euclidean(1))?;
    let u_norm = lp_norm(&input.u, input.p, &input.ip)?
        + besov_seminorm(&input.u, BesovIndex::new(input.alpha, input.p)?, &input.ip)?;
    let i_semi = besov_seminorm(&input.integrator, BesovIndex::new(beta, input.q)?, &input.ip)?;
    let rhs = u_norm * i_semi;
    let ratio = if rhs > 0.0 {
        lhs / rhs
    } else if lhs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(StabilityAudit { lhs, rhs, ratio })
}

/// `∂_t I` at the nodes: centered differences inside, one-sided at the ends.
pub fn finite_difference_derivative(path: &SampledPath) -> SampledPath {
    let grid: TimeGrid = *path.grid();
    let n = grid.n();
    let dt = grid.dt();
    let d = path.dim();
    let mut data = vec![0.0; path.len() * d];
    for k in 0..=n {
        let (lo, hi, span) = match k {
            0 => (0, 1, dt),
            k if k == n => (n - 1, n, dt),
            k => (k - 1, k + 1, 2.0 * dt),
        };
        for c in 0..d {
            data[k * d + c] = (path.row(hi)[c] - path.row(lo)[c]) / span;
        }
    }
    SampledPath::new(grid, d, data).expect("finite differences of finite samples")
}

#[derive(Debug, Clone)]
pub struct BochnerReport {
    /// `max_t |𝓢_t(u, dI) - ∫_0^t (u_r, ∂_r I_r)_H dr|`.
    pub gap: f64,
    pub sewn: SampledPath,
    pub quadrature: SampledPath,
}

/// Compares the Young pairing with the Bochner integral of
/// `(u, ∂_t I)_H` (finite-difference derivative, trapezoid rule).
pub fn bochner_identify(
    u: &SampledPath,
    i: &SampledPath,
    ip: &InnerProduct,
    opts: SewOptions,
) -> Result<BochnerReport> {
    let sewn = pair_sew(u, i, ip, 2.0, opts)?.integral;
    let di = finite_difference_derivative(i);
    let grid = *u.grid();
    let dt = grid.dt();
    let integrand: Vec<f64> = (0..=grid.n()).map(|k| ip.inner(u.row(k), di.row(k))).collect();
    let mut q = vec![0.0; grid.len()];
    for k in 0..grid.n() {
        q[k + 1] = q[k] + 0.5 * dt * (integrand[k] + integrand[k + 1]);
    }
    let quadrature = SampledPath::scalar(grid, q)?;
    let gap = sewn.sub(&quadrature)?.max_abs();
    Ok(BochnerReport { gap, sewn, quadrature })
}

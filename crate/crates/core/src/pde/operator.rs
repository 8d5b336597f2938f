use std::sync::Arc;

use super::space::{SpaceGrid, Tridiagonal};
use crate::error::{invalid, Error, Result};
use crate::grid_paths::InnerProduct;

/// Scalar nonlinearity `Ψ` of the porous-medium operator with the constants
/// of its growth conditions:
/// `sΨ(s) ≥ a|s|^p - c` and `|Ψ(s)| ≤ c4 + c3|s|^{p-1}`.
#[derive(Clone)]
pub struct Psi {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    label: String,
    pub p: f64,
    pub a: f64,
    pub c: f64,
    pub c3: f64,
    pub c4: f64,
}

impl std::fmt::Debug for Psi {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Psi")
            .field("label", &self.label)
            .field("p", &self.p)
            .field("a", &self.a)
            .field("c", &self.c)
            .field("c3", &self.c3)
            .field("c4", &self.c4)
            .finish()
    }
}

impl Psi {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        label: impl Into<String>,
        p: f64,
        a: f64,
        c: f64,
        c3: f64,
        c4: f64,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(p > 1.0) || !(a > 0.0) || !(c >= 0.0) || !(c3 >= 0.0) || !(c4 >= 0.0) {
            return Err(invalid(format!(
                "Ψ constants need p>1, a>0, c,c3,c4 ≥ 0 (got p={p}, a={a}, c={c}, c3={c3}, c4={c4})"
            )));
        }
        Ok(Self {
            f: Arc::new(f),
            label: label.into(),
            p,
            a,
            c,
            c3,
            c4,
        })
    }

    /// `Ψ(s) = s|s|^{m-1}`, so that `p = m + 1`, `a = c3 = 1`, `c = c4 = 0`.
    pub fn power(m: f64) -> Result<Self> {
        if !(m >= 1.0) {
            return Err(invalid(format!("porous-medium exponent m must be at least 1, got {m}")));
        }
        Self::new(format!("s|s|^{}", m - 1.0), m + 1.0, 1.0, 0.0, 1.0, 0.0, move |s| {
            s * s.abs().powf(m - 1.0)
        })
    }

    pub fn identity() -> Self {
        Self::new("id", 2.0, 1.0, 0.0, 1.0, 0.0, |s| s).expect("valid constants")
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, s: f64) -> f64 {
        (self.f)(s)
    }

    /// Central difference quotient with step `1e-6(1 + |s|)`.
    pub fn derivative(&self, s: f64) -> f64 {
        let h = 1e-6 * (1.0 + s.abs());
        (self.eval(s + h) - self.eval(s - h)) / (2.0 * h)
    }
}

#[derive(Debug, Clone)]
pub enum Operator {
    /// `Δ_p u = div(|∇u|^{p-2}∇u)` with forward differences.
    PLaplace {
        p: f64,
    },
    /// `Δ_h Ψ(u)` acting on `H = W^{-1,2}`.
    PorousMedium {
        psi: Psi,
    },
    Zero,
}

/// Constants of the monotone-operator conditions. Time functions are
/// constant in `t` for the shipped operators and `η ≡ 0`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct AssumptionConstants {
    pub alpha: f64,
    pub c1: f64,
    pub c2: f64,
    pub f: f64,
    pub c3: f64,
    pub g: f64,
    pub h: f64,
    pub strictly_monotone: bool,
}

impl AssumptionConstants {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.alpha, self.c1, self.c2, self.f, self.c3, self.g, self.h]
            .iter()
            .all(|x| x.is_finite());
        if !finite || !(self.alpha > 1.0) || !(self.c1 > 0.0) || self.c3 < 0.0 || self.f < 0.0 || self.g < 0.0 {
            return Err(invalid(format!("inadmissible assumption constants {self:?}")));
        }
        Ok(())
    }

    /// Conjugate exponent `α' = α/(α-1)`.
    pub fn alpha_conj(&self) -> f64 {
        self.alpha / (self.alpha - 1.0)
    }
}

/// Discrete Gelfand triple `V ⊂ H ⊂ V*` on a [`SpaceGrid`] together with an
/// operator `A: V → V*`. Elements of `V*` are stored by their
/// `H`-representative, so `⟨F, v⟩ = (F, v)_H`.
#[derive(Debug, Clone)]
pub struct GelfandDiscretization {
    space: SpaceGrid,
    op: Operator,
    ip: InnerProduct,
    constants: AssumptionConstants,
}

fn weighted_pnorm(values: impl Iterator<Item = f64>, p: f64, w: f64) -> f64 {
    let s: f64 = values.map(|x| x.abs().powf(p)).sum();
    (s * w).powf(1.0 / p)
}

/// `min_c (Σ |L_j - c|^r Δx)^{1/r}` by bisection on the monotone derivative.
fn min_shifted_norm(l: &[f64], r: f64, w: f64) -> f64 {
    let lo0 = l.iter().copied().fold(f64::INFINITY, f64::min);
    let hi0 = l.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let slope = |c: f64| -> f64 { l.iter().map(|x| (x - c).signum() * (x - c).abs().powf(r - 1.0)).sum() };
    let (mut lo, mut hi) = (lo0, hi0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * (1.0 + lo0.abs().max(hi0.abs())) {
            break;
        }
    }
    let c = 0.5 * (lo + hi);
    weighted_pnorm(l.iter().map(|x| x - c), r, w)
}

impl GelfandDiscretization {
    /// `V = W^{1,p}_0`, `H = L²`, `A = Δ_p`. Needs `p > 1`.
    pub fn p_laplace(d: usize, p: f64) -> Result<Self> {
        if !(p > 1.0) {
            return Err(invalid(format!("p-Laplace exponent must exceed 1, got {p}")));
        }
        let space = SpaceGrid::new(d)?;
        Ok(Self {
            space,
            op: Operator::PLaplace { p },
            ip: space.l2(),
            constants: AssumptionConstants {
                alpha: p,
                c1: 1.0,
                c2: 0.0,
                f: 0.0,
                c3: 1.0,
                g: 0.0,
                h: 0.0,
                strictly_monotone: true,
            },
        })
    }

    /// `V = L^p`, `H = W^{-1,2}`, `A = Δ_h Ψ`.
    pub fn porous_medium(d: usize, psi: Psi) -> Result<Self> {
        let space = SpaceGrid::new(d)?;
        let p = psi.p;
        let measure = space.measure();
        let constants = AssumptionConstants {
            alpha: p,
            c1: psi.a,
            c2: 0.0,
            f: psi.c * measure,
            c3: psi.c3,
            g: psi.c4 * measure.powf(1.0 - 1.0 / p),
            h: 0.0,
            strictly_monotone: true,
        };
        Ok(Self {
            space,
            op: Operator::PorousMedium { psi },
            ip: space.h_minus_one(),
            constants,
        })
    }

    /// `A ≡ 0` on `V = H = L²`; (H3) then holds with `c1 = c2 = 1`.
    pub fn zero(d: usize) -> Result<Self> {
        let space = SpaceGrid::new(d)?;
        Ok(Self {
            space,
            op: Operator::Zero,
            ip: space.l2(),
            constants: AssumptionConstants {
                alpha: 2.0,
                c1: 1.0,
                c2: 1.0,
                f: 0.0,
                c3: 0.0,
                g: 0.0,
                h: 0.0,
                strictly_monotone: true,
            },
        })
    }

    pub fn space(&self) -> &SpaceGrid {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.d()
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn ip(&self) -> &InnerProduct {
        &self.ip
    }

    pub fn constants(&self) -> &AssumptionConstants {
        &self.constants
    }

    pub fn name(&self) -> String {
        match &self.op {
            Operator::PLaplace { p } => format!("p-Laplace(p={p})"),
            Operator::PorousMedium { psi } => format!("porous-medium(Ψ={})", psi.label()),
            Operator::Zero => "zero".into(),
        }
    }

    pub(crate) fn check(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: u.len(),
                context: "Gelfand triple",
            });
        }
        Ok(())
    }

    /// Forward differences `(u_{j+1} - u_j)/Δx`, `j = 0..=d`, with the
    /// boundary zeros attached.
    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let d = u.len();
        let dx = self.space.dx();
        (0..=d)
            .map(|j| {
                let right = if j < d { u[j] } else { 0.0 };
                let left = if j > 0 { u[j - 1] } else { 0.0 };
                (right - left) / dx
            })
            .collect()
    }

    fn flux(p: f64, g: f64) -> f64 {
        if g == 0.0 {
            0.0
        } else {
            g.abs().powf(p - 2.0) * g
        }
    }

    /// `H`-representative of `A(t, u)`.
    pub fn apply(&self, _t: f64, u: &[f64], out: &mut [f64]) {
        let dx = self.space.dx();
        match &self.op {
            Operator::PLaplace { p } => {
                let phi: Vec<f64> = self.gradient(u).into_iter().map(|g| Self::flux(*p, g)).collect();
                for (i, o) in out.iter_mut().enumerate() {
                    *o = (phi[i + 1] - phi[i]) / dx;
                }
            }
            Operator::PorousMedium { psi } => {
                let d = u.len();
                let c = 1.0 / (dx * dx);
                let s: Vec<f64> = u.iter().map(|x| psi.eval(*x)).collect();
                for (i, o) in out.iter_mut().enumerate() {
                    let left = if i > 0 { s[i - 1] } else { 0.0 };
                    let right = if i + 1 < d { s[i + 1] } else { 0.0 };
                    *o = c * (left - 2.0 * s[i] + right);
                }
            }
            Operator::Zero => out.fill(0.0),
        }
    }

    pub fn apply_vec(&self, t: f64, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.apply(t, u, &mut out);
        out
    }

    /// `⟨A(t, u), v⟩` in flux form, without passing through `H`.
    pub fn pair(&self, _t: f64, u: &[f64], v: &[f64]) -> f64 {
        let dx = self.space.dx();
        match &self.op {
            Operator::PLaplace { p } => {
                let gu = self.gradient(u);
                let gv = self.gradient(v);
                -gu.iter().zip(&gv).map(|(a, b)| Self::flux(*p, *a) * b).sum::<f64>() * dx
            }
            Operator::PorousMedium { psi } => -u.iter().zip(v).map(|(a, b)| psi.eval(*a) * b).sum::<f64>() * dx,
            Operator::Zero => 0.0,
        }
    }

    /// `⟨F, v⟩_{V*,V}` for an `H`-representative `F`.
    pub fn duality(&self, f: &[f64], v: &[f64]) -> f64 {
        self.ip.inner(f, v)
    }

    pub fn v_norm(&self, u: &[f64]) -> f64 {
        let dx = self.space.dx();
        match &self.op {
            Operator::PLaplace { p } => weighted_pnorm(self.gradient(u).into_iter(), *p, dx),
            Operator::PorousMedium { psi } => weighted_pnorm(u.iter().copied(), psi.p, dx),
            Operator::Zero => self.ip.norm(u),
        }
    }

    /// `‖F‖_{V*}` of an `H`-representative, as the dual norm of the load
    /// functional `v ↦ (F, v)_H`.
    pub fn dual_norm(&self, f: &[f64]) -> f64 {
        let dx = self.space.dx();
        let load = self.ip.gram_apply(f);
        match &self.op {
            Operator::PLaplace { p } => {
                // v_i = Δx Σ_{j<i} g_j turns the load into Σ_j g_j L_j Δx with
                // L_j = Σ_{i>j} ℓ_i, and Σ_j g_j = 0 frees a constant shift.
                let d = load.len();
                let mut tail = vec![0.0; d + 1];
                for j in (0..d).rev() {
                    tail[j] = tail[j + 1] + load[j];
                }
                min_shifted_norm(&tail, *p / (*p - 1.0), dx)
            }
            Operator::PorousMedium { psi } => weighted_pnorm(load.iter().map(|x| x / dx), psi.p / (psi.p - 1.0), dx),
            Operator::Zero => weighted_pnorm(load.iter().map(|x| x / dx), 2.0, dx),
        }
    }

    /// Jacobian of [`apply`](Self::apply). For `p < 2` the flux derivative
    /// is evaluated with `|∇u|` floored at `1e-12(1 + max|∇u|)`.
    pub(crate) fn jacobian(&self, _t: f64, u: &[f64]) -> Tridiagonal {
        let d = u.len();
        let dx = self.space.dx();
        let c = 1.0 / (dx * dx);
        let mut jac = Tridiagonal::zeros(d);
        match &self.op {
            Operator::PLaplace { p } => {
                let g = self.gradient(u);
                let gmax = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                let floor = 1e-12 * (1.0 + gmax);
                let dphi: Vec<f64> = g
                    .iter()
                    .map(|x| {
                        let a = if *p < 2.0 { x.abs().max(floor) } else { x.abs() };
                        if *p == 2.0 {
                            1.0
                        } else {
                            (p - 1.0) * a.powf(p - 2.0)
                        }
                    })
                    .collect();
                for i in 0..d {
                    jac.diag[i] = -c * (dphi[i] + dphi[i + 1]);
                    if i + 1 < d {
                        jac.sup[i] = c * dphi[i + 1];
                        jac.sub[i] = c * dphi[i + 1];
                    }
                }
            }
            Operator::PorousMedium { psi } => {
                let dpsi: Vec<f64> = u.iter().map(|x| psi.derivative(*x)).collect();
                for i in 0..d {
                    jac.diag[i] = -2.0 * c * dpsi[i];
                    if i + 1 < d {
                        jac.sup[i] = c * dpsi[i + 1];
                        jac.sub[i] = c * dpsi[i];
                    }
                }
            }
            Operator::Zero => {}
        }
        jac
    }
}

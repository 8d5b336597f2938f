use serde::{Deserialize, Serialize};

use super::{InnerProduct, SampledPath};
use crate::error::{invalid, Error, Result};
use crate::par;

/// Regularity descriptor `(α, p, q)` for the Nikolskii scale `B^α_{p,∞}`.
/// `p = f64::INFINITY` selects the sup-in-time variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovIndex {
    alpha: f64,
    p: f64,
}

impl BesovIndex {
    pub fn new(alpha: f64, p: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(invalid(format!("Besov regularity must lie in (0, 1], got {alpha}")));
        }
        if !(p >= 1.0) {
            return Err(invalid(format!("Besov integrability must be at least 1, got {p}")));
        }
        Ok(Self { alpha, p })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Fine index; estimators only support `q = ∞`.
    pub fn q(&self) -> f64 {
        f64::INFINITY
    }
}

/// Path rows mapped through [`InnerProduct::whiten`], flattened.
pub(crate) fn whiten_path(path: &SampledPath, ip: &InnerProduct) -> Result<Vec<f64>> {
    ip.check_dim(path.dim())?;
    let mut out = Vec::with_capacity(path.data().len());
    for row in path.rows() {
        out.extend(ip.whiten(row));
    }
    Ok(out)
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `p`-mean of increments at every lag `k = 1..=n` of whitened rows `w`:
/// `(Δt Σ_{j=0}^{n-k-1} |w_{j+k} - w_j|^p)^{1/p}`, or the max over
/// `j = 0..=n-k` for `p = ∞`. Entry `k - 1` holds lag `k`.
fn lag_means(w: &[f64], dim: usize, dt: f64, p: f64) -> Vec<f64> {
    let n = w.len() / dim - 1;
    let row = |j: usize| &w[j * dim..(j + 1) * dim];
    par::map_range(n, |i| {
        let k = i + 1;
        if p.is_infinite() {
            let mut m: f64 = 0.0;
            for j in 0..=n - k {
                m = m.max(dist_sq(row(j + k), row(j)));
            }
            m.sqrt()
        } else {
            let mut acc = 0.0;
            if p == 2.0 {
                for j in 0..n - k {
                    acc += dist_sq(row(j + k), row(j));
                }
            } else {
                for j in 0..n - k {
                    acc += dist_sq(row(j + k), row(j)).powf(0.5 * p);
                }
            }
            (dt * acc).powf(1.0 / p)
        }
    })
}

fn check_samples(path: &SampledPath) -> Result<()> {
    if path.len() < 2 {
        return Err(Error::SeminormUndefined);
    }
    Ok(())
}

/// Discrete Nikolskii seminorm `sup_h h^{-α} (∫_0^{T-h} ‖u_{t+h} - u_t‖_H^p dt)^{1/p}`
/// over lags `h = kΔt`.
pub fn besov_seminorm(path: &SampledPath, idx: BesovIndex, ip: &InnerProduct) -> Result<f64> {
    check_samples(path)?;
    let w = whiten_path(path, ip)?;
    let dt = path.grid().dt();
    let means = lag_means(&w, path.dim(), dt, idx.p());
    Ok(means
        .iter()
        .enumerate()
        .map(|(i, m)| m / ((i + 1) as f64 * dt).powf(idx.alpha()))
        .fold(0.0, f64::max))
}

/// Hölder seminorm `sup_{s≠t} ‖u_t - u_s‖_H / |t - s|^α` over all node pairs.
pub fn holder_seminorm(path: &SampledPath, alpha: f64, ip: &InnerProduct) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid(format!("Hölder exponent must lie in (0, 1], got {alpha}")));
    }
    besov_seminorm(path, BesovIndex::new(alpha, f64::INFINITY)?, ip)
}

/// `max_k ‖u_k‖_H`.
pub fn linf_norm(path: &SampledPath, ip: &InnerProduct) -> Result<f64> {
    ip.check_dim(path.dim())?;
    Ok(path.rows().map(|r| ip.norm(r)).fold(0.0, f64::max))
}

/// `(Δt Σ_{k<n} ‖u_k‖_H^p)^{1/p}`; `p = ∞` gives [`linf_norm`].
pub fn lp_norm(path: &SampledPath, p: f64, ip: &InnerProduct) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(invalid(format!("Lebesgue exponent must be at least 1, got {p}")));
    }
    if p.is_infinite() {
        return linf_norm(path, ip);
    }
    ip.check_dim(path.dim())?;
    let n = path.grid().n();
    let acc: f64 = (0..n).map(|k| ip.norm(path.row(k)).powf(p)).sum();
    Ok((path.grid().dt() * acc).powf(1.0 / p))
}

/// Bound on the `B^{1/2}_{2,∞}` seminorm of a path glued from `N` pieces,
/// given the seminorms of the pieces, the sup norm of the whole path, the
/// shortest piece length and the total interval length:
/// `sqrt(Σ sub² + L∞²·2(N - 1 + |J|/h_min))`.
pub fn nikolskii_glue_bound(
    sub_seminorms: &[f64],
    linf_norm: f64,
    n_pieces: usize,
    h_min: f64,
    interval_len: f64,
) -> Result<f64> {
    if n_pieces == 0 {
        return Err(invalid("glue bound needs at least one piece"));
    }
    if sub_seminorms.len() != n_pieces {
        return Err(Error::DimensionMismatch {
            expected: n_pieces,
            actual: sub_seminorms.len(),
            context: "piece seminorms",
        });
    }
    if !(h_min > 0.0) {
        return Err(invalid(format!("shortest piece length must be positive, got {h_min}")));
    }
    if !(interval_len >= 0.0) || !(linf_norm >= 0.0) || sub_seminorms.iter().any(|s| !(*s >= 0.0)) {
        return Err(invalid("glue bound inputs must be nonnegative"));
    }
    let sum_sq: f64 = sub_seminorms.iter().map(|s| s * s).sum();
    let glue = linf_norm * linf_norm * 2.0 * ((n_pieces - 1) as f64 + interval_len / h_min);
    Ok((sum_sq + glue).sqrt())
}

/// Constant `3^{2-(γ-1/q)}/(γ-1/q)` of the shift bound; needs `γ > 1/q`.
pub fn shift_bound_constant(gamma: f64, q: f64) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(invalid(format!("shift bound needs q ≥ 1, got {q}")));
    }
    let e = gamma - 1.0 / q;
    if !(e > 0.0) {
        return Err(invalid(format!("shift bound needs γ > 1/q, got γ={gamma}, q={q}")));
    }
    Ok(3f64.powf(2.0 - e) / e)
}

/// `sup_s (∫_J ‖u_t - u_s‖_H^q dt)^{1/q}`, left Riemann in `t`, sup over
/// nodes `s`; `q = ∞` gives the oscillation.
pub fn shift_bound_lhs(path: &SampledPath, q: f64, ip: &InnerProduct) -> Result<f64> {
    check_samples(path)?;
    if !(q >= 1.0) {
        return Err(invalid(format!("shift bound needs q ≥ 1, got {q}")));
    }
    let w = whiten_path(path, ip)?;
    let dim = path.dim();
    let n = path.grid().n();
    let dt = path.grid().dt();
    let row = |j: usize| &w[j * dim..(j + 1) * dim];
    let per_s = par::map_range(n + 1, |s| {
        if q.is_infinite() {
            (0..=n).map(|t| dist_sq(row(t), row(s))).fold(0.0, f64::max).sqrt()
        } else {
            let acc: f64 = (0..n).map(|t| dist_sq(row(t), row(s)).powf(0.5 * q)).sum();
            (dt * acc).powf(1.0 / q)
        }
    });
    Ok(par::max_of(&per_s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_paths::TimeGrid;

    fn scalar(n: usize, f: impl Fn(f64) -> f64) -> SampledPath {
        SampledPath::scalar_fn(TimeGrid::unit(n).unwrap(), f).unwrap()
    }

    #[test]
    fn constant_path_has_zero_seminorm() {
        let ip = InnerProduct::euclidean(1);
        let p = scalar(64, |_| 3.0);
        for pp in [1.0, 2.0, f64::INFINITY] {
            assert_eq!(besov_seminorm(&p, BesovIndex::new(0.5, pp).unwrap(), &ip).unwrap(), 0.0);
        }
    }

    #[test]
    fn identity_path_values() {
        let ip = InnerProduct::euclidean(1);
        let p = scalar(10_000, |t| t);
        // sup_h h^{-1/2}(h²(1-h))^{1/2} = sup_h sqrt(h(1-h)) = 1/2
        let s = besov_seminorm(&p, BesovIndex::new(0.5, 2.0).unwrap(), &ip).unwrap();
        assert!((s - 0.5).abs() < 1e-2, "{s}");
        let lip = besov_seminorm(&p, BesovIndex::new(1.0, f64::INFINITY).unwrap(), &ip).unwrap();
        assert!((lip - 1.0).abs() < 1e-9);
        assert!((holder_seminorm(&p, 1.0, &ip).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mismatched_inner_product_is_rejected() {
        let g = TimeGrid::unit(1).unwrap();
        let p = SampledPath::scalar(g, vec![0.0, 1.0]).unwrap();
        let err = besov_seminorm(&p, BesovIndex::new(0.5, 2.0).unwrap(), &InnerProduct::euclidean(2)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
        assert!(TimeGrid::unit(0).is_err());
    }

    #[test]
    fn glue_bound_examples() {
        let b = nikolskii_glue_bound(&[2.0], 1.5, 1, 0.25, 1.0).unwrap();
        assert!((b - (4.0f64 + 2.25 * 2.0 * 4.0).sqrt()).abs() < 1e-14);
        assert_eq!(nikolskii_glue_bound(&[0.0, 0.0], 0.0, 2, 0.5, 1.0).unwrap(), 0.0);
        assert!(nikolskii_glue_bound(&[1.0], 1.0, 1, 0.0, 1.0).is_err());
    }

    #[test]
    fn shift_constant_formula() {
        let c = shift_bound_constant(0.75, 2.0).unwrap();
        assert!((c - 3f64.powf(1.75) / 0.25).abs() < 1e-12);
        assert!(shift_bound_constant(0.4, 2.0).is_err());
    }
}

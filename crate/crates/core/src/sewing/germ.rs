use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::grid_paths::SampledPath;

/// Two-parameter map `(s, t) ↦ A_{s,t} ∈ R^d` for `s ≤ t`.
///
/// Evaluation must be pure: the engine may evaluate any pair more than once
/// and in any order.
pub trait Germ: Sync {
    fn dim(&self) -> usize;

    fn eval(&self, s: f64, t: f64, out: &mut [f64]);

    /// Regularity exponent of `A` itself.
    fn declared_alpha(&self) -> f64;

    /// Regularity exponent of `δA`; sewing needs it above 1.
    fn declared_gamma(&self) -> f64;

    /// `δA_{s,u,t} = A_{s,t} - A_{s,u} - A_{u,t}`.
    fn delta(&self, s: f64, u: f64, t: f64, out: &mut [f64]) {
        let d = self.dim();
        let mut su = vec![0.0; d];
        let mut ut = vec![0.0; d];
        self.eval(s, t, out);
        self.eval(s, u, &mut su);
        self.eval(u, t, &mut ut);
        for ((o, a), b) in out.iter_mut().zip(&su).zip(&ut) {
            *o -= a + b;
        }
    }

    /// True when `A_{s,t} = f_t - f_s` for some path `f`, so that `δA = 0`.
    fn is_additive(&self) -> bool {
        false
    }
}

impl<G: Germ + ?Sized> Germ for &G {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, s: f64, t: f64, out: &mut [f64]) {
        (**self).eval(s, t, out)
    }
    fn declared_alpha(&self) -> f64 {
        (**self).declared_alpha()
    }
    fn declared_gamma(&self) -> f64 {
        (**self).declared_gamma()
    }
    fn delta(&self, s: f64, u: f64, t: f64, out: &mut [f64]) {
        (**self).delta(s, u, t, out)
    }
    fn is_additive(&self) -> bool {
        (**self).is_additive()
    }
}

impl<G: Germ + ?Sized + Send> Germ for Box<G> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, s: f64, t: f64, out: &mut [f64]) {
        (**self).eval(s, t, out)
    }
    fn declared_alpha(&self) -> f64 {
        (**self).declared_alpha()
    }
    fn declared_gamma(&self) -> f64 {
        (**self).declared_gamma()
    }
    fn delta(&self, s: f64, u: f64, t: f64, out: &mut [f64]) {
        (**self).delta(s, u, t, out)
    }
    fn is_additive(&self) -> bool {
        (**self).is_additive()
    }
}

impl<G: Germ + ?Sized + Send> Germ for Arc<G> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, s: f64, t: f64, out: &mut [f64]) {
        (**self).eval(s, t, out)
    }
    fn declared_alpha(&self) -> f64 {
        (**self).declared_alpha()
    }
    fn declared_gamma(&self) -> f64 {
        (**self).declared_gamma()
    }
    fn delta(&self, s: f64, u: f64, t: f64, out: &mut [f64]) {
        (**self).delta(s, u, t, out)
    }
    fn is_additive(&self) -> bool {
        (**self).is_additive()
    }
}

/// `A_{s,t} = f_t - f_s` for the piecewise-linear interpolant of `f`.
#[derive(Debug, Clone)]
pub struct IncrementGerm {
    path: SampledPath,
    alpha: f64,
}

impl IncrementGerm {
    /// Declared regularity 1, which is exact for the interpolant.
    pub fn new(path: SampledPath) -> Self {
        Self { path, alpha: 1.0 }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn path(&self) -> &SampledPath {
        &self.path
    }
}

impl Germ for IncrementGerm {
    fn dim(&self) -> usize {
        self.path.dim()
    }

    fn eval(&self, s: f64, t: f64, out: &mut [f64]) {
        let mut a = vec![0.0; self.dim()];
        self.path.eval_into(s, &mut a);
        self.path.eval_into(t, out);
        for (o, x) in out.iter_mut().zip(&a) {
            *o -= x;
        }
    }

    fn declared_alpha(&self) -> f64 {
        self.alpha
    }

    fn declared_gamma(&self) -> f64 {
        f64::INFINITY
    }

    fn delta(&self, _s: f64, _u: f64, _t: f64, out: &mut [f64]) {
        out.fill(0.0);
    }

    fn is_additive(&self) -> bool {
        true
    }
}

type GermFn = dyn Fn(f64, f64, &mut [f64]) + Send + Sync;

/// Germ given by a closure.
#[derive(Clone)]
pub struct FnGerm {
    dim: usize,
    alpha: f64,
    gamma: f64,
    f: Arc<GermFn>,
}

impl std::fmt::Debug for FnGerm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnGerm")
            .field("dim", &self.dim)
            .field("alpha", &self.alpha)
            .field("gamma", &self.gamma)
            .finish_non_exhaustive()
    }
}

impl FnGerm {
    pub fn new(dim: usize, alpha: f64, gamma: f64, f: impl Fn(f64, f64, &mut [f64]) + Send + Sync + 'static) -> Self {
        Self {
            dim,
            alpha,
            gamma,
            f: Arc::new(f),
        }
    }

    /// Scalar germ from a closure returning `f64`.
    pub fn scalar(alpha: f64, gamma: f64, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(1, alpha, gamma, move |s, t, out| out[0] = f(s, t))
    }
}

impl Germ for FnGerm {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, s: f64, t: f64, out: &mut [f64]) {
        (self.f)(s, t, out)
    }
    fn declared_alpha(&self) -> f64 {
        self.alpha
    }
    fn declared_gamma(&self) -> f64 {
        self.gamma
    }
}

/// `Σ c_i A^i`. Declared exponents are the minima over the terms.
pub struct LinearCombination<'a> {
    terms: Vec<(f64, &'a dyn Germ)>,
    dim: usize,
}

impl<'a> LinearCombination<'a> {
    pub fn new(terms: Vec<(f64, &'a dyn Germ)>) -> Result<Self> {
        let dim = terms
            .first()
            .map(|(_, g)| g.dim())
            .ok_or_else(|| invalid("linear combination needs at least one germ"))?;
        if terms.iter().any(|(_, g)| g.dim() != dim) {
            return Err(invalid("germs in a linear combination must share their dimension"));
        }
        Ok(Self { terms, dim })
    }

    /// `A - B`.
    pub fn difference(a: &'a dyn Germ, b: &'a dyn Germ) -> Result<Self> {
        Self::new(vec![(1.0, a), (-1.0, b)])
    }
}

impl Germ for LinearCombination<'_> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, s: f64, t: f64, out: &mut [f64]) {
        out.fill(0.0);
        let mut buf = vec![0.0; self.dim];
        for (c, g) in &self.terms {
            g.eval(s, t, &mut buf);
            for (o, x) in out.iter_mut().zip(&buf) {
                *o += c * x;
            }
        }
    }

    fn delta(&self, s: f64, u: f64, t: f64, out: &mut [f64]) {
        out.fill(0.0);
        let mut buf = vec![0.0; self.dim];
        for (c, g) in &self.terms {
            g.delta(s, u, t, &mut buf);
            for (o, x) in out.iter_mut().zip(&buf) {
                *o += c * x;
            }
        }
    }

    fn declared_alpha(&self) -> f64 {
        self.terms
            .iter()
            .map(|(_, g)| g.declared_alpha())
            .fold(f64::INFINITY, f64::min)
    }

    fn declared_gamma(&self) -> f64 {
        self.terms
            .iter()
            .map(|(_, g)| g.declared_gamma())
            .fold(f64::INFINITY, f64::min)
    }

    fn is_additive(&self) -> bool {
        self.terms.iter().all(|(_, g)| g.is_additive())
    }
}

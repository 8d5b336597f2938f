//! Pathwise analysis toolkit for locally monotone evolution equations
//! `du = A(t, u) dt + dI_t(u)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid_paths`]: uniform time grids, sampled paths, discrete Nikolskii /
//!   Hölder seminorms, fractional Brownian motion sampling.
//! * [`sewing`]: germs on the 2-simplex, their Ω-norms and the dyadic sewing
//!   operator with remainder diagnostics.
//! * [`young`]: Young pairings, abstract Young integrals `∫σ(u)dX`, the energy
//!   identity and chain-rule residuals.
//! * [`occupation`]: histogram local times, the occupation-times formula and the
//!   regularized drift integral `∫ b(u_s - w_s) ds`.
//! * [`pde`]: discrete Gelfand triples, p-Laplace / porous-medium operators,
//!   drivers and the semi-implicit solver with its audits.
//!
//! With the default `parallel` feature the data-parallel inner loops (per-cell
//! sewing, lag sweeps, Monte Carlo batches) run on rayon; without it every
//! operation runs sequentially and produces bit-identical results.

// `!(x > a)` guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod grid_paths;
pub mod occupation;
pub(crate) mod par;
pub mod pde;
pub mod rng;
pub mod sewing;
pub mod young;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

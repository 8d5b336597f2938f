//! Germs on the 2-simplex, their Besov-type norms, and the sewing map.

mod analysis;
mod engine;
mod germ;
mod norms;

pub use analysis::{
    fit_slope, germ_equivalence, sewing_convergence, ConvergenceReport, ConvergenceRow, EquivalenceReport,
    EXACT_THRESHOLD,
};
pub use engine::{sew, sew_with, LevelDiagnostic, SewOptions, SewingResult, DEFAULT_MAX_LEVEL};
pub use germ::{FnGerm, Germ, IncrementGerm, LinearCombination};
pub use norms::{germ_norms, remainder_norm, GermNorms, RemainderReport};

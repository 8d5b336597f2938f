//! Time grids, sampled paths and the discrete regularity estimators built on
//! them.

mod fbm;
mod grid;
mod inner;
pub mod io;
mod seminorm;
mod transform;

pub use fbm::{fbm_covariance, generate_colored_fbm, generate_fbm, FbmMethod, FbmSampler, HurstSpec};
pub use grid::{PathIntegrator, SampledPath, TimeGrid};
pub use inner::InnerProduct;
pub(crate) use seminorm::whiten_path;
pub use seminorm::{
    besov_seminorm, holder_seminorm, linf_norm, lp_norm, nikolskii_glue_bound, shift_bound_constant, shift_bound_lhs,
    BesovIndex,
};
pub use transform::{mollify_path, time_average};

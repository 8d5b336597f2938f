//! Histogram local times of scalar paths, the occupation-times formula, and
//! the regularized drift `∫ b(u_s - w_s) ds` written through `b ∗ L^w`.

mod drift;
mod local_time;

pub use drift::{
    convolution_regularity, convolve_local_time, mollified_delta, regularized_drift_integral, ConvolvedMap, DriftGerm,
    DriftIntegralReport, DriftSpec,
};
pub use local_time::{local_time, occupation_formula_check, LocalTimeField, OccupationCheck, SpatialBins};

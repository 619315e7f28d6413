//! Singular sets and the reparametrizability verdicts.

mod decide;
mod integral;
mod report;
mod scalar;
mod singular;

pub use decide::{decide, monotone_tail_decide, monotone_windows};
pub use integral::{sqrt_curvature_integral, CurvatureIntegral};
pub use report::*;
pub use scalar::{lebedev_check, lp_half_variation, monotone_pieces, scalar_curve, HalfPowerVariation, MonotonePieces};
pub use singular::{detect_singular_set, EstimateSource, Mode, SingularSetEstimate};

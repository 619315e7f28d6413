//! Curvature suprema, greedy generalized partitions, √-variation sums and
//! half-variation lower bounds.

mod curvature;
mod greedy;
mod half;
mod sums;

pub use curvature::CurvatureField;
pub use greedy::*;
pub use half::{half_variation_lower_bound, HalfVariation};
pub use sums::{sqrt_variation_sum, SqrtSum};

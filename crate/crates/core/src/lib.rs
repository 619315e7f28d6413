//! Numerical analysis of curves for C² and bounded-second-derivative
//! reparametrizability, with explicit construction of the smoothing
//! homeomorphism.

// `!(x > 0.0)` is the idiom here for rejecting NaN along with nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod curve_model;
pub mod decision;
pub mod error;
pub mod geometry;
pub mod ode;
pub mod partition;
pub mod quadrature;
pub mod reparam;
pub mod variation;

pub use config::Config;
pub use curve_model::{CurveSource, IntervalSet, ScalarFunction};
pub use error::{Error, Result};
pub use quadrature::Convergence;
pub use variation::{ArcLengthCurve, NullTest, NullVerdict, VariationProfile};

//! Explicit smoothing homeomorphisms: density transport, bridge and ramp
//! maps, their assembly into h = ξ∘φ∘π, and numerical smoothness checks.

mod assemble;
mod bridge;
mod cubic;
mod density;
mod ramp;
mod verify;

pub use assemble::{
    assemble, greedy_partitions, reparametrize, CompositeHomeomorphism, PieceKind, StageCell, StageManifest,
};
pub use bridge::{bridge, BridgeMap, BRIDGE_SLOPE_LIMIT};
pub use cubic::PiecewiseCubic;
pub use density::{density_homeomorphism, WeightedHomeo};
pub use ramp::{ramp, RampMap, RAMP_BOUND, RAMP_SLOPE_LIMIT};
pub use verify::{
    derivative_norm, verify_smoothness, zero_derivative_at_boundary, BoundaryDerivative, BoundaryReport,
    FnReparametrization, ModulusRow, Reparametrization, SmoothnessReport, RATIO_BAND,
};

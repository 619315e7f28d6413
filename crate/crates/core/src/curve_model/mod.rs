//! Curve representation, differentiation and the reference corpus.

mod corpus;
mod curve;
mod descriptor;

pub use corpus::*;
pub use curve::*;
pub use descriptor::*;

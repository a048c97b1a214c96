//! Verification toolkit for uniqueness of the antiferromagnetic Potts model
//! on regular trees: exact recursions, bounding sequences, the two-level
//! contraction condition and the certified resolvers that decide them.

pub mod bounds;
pub mod condition;
pub mod model;
pub mod numeric;
pub mod resolver;

pub use model::{BoundaryConfig, GibbsWeights, ModelError, ModelParams, ProbVec};
pub use numeric::{Interval, NumericError, Rational};

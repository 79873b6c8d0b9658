//! Numerical toolkit for weighted Bergman spaces on the upper half-plane and the
//! unit ball: level-set distance functionals, reproducing-kernel checks and
//! Whitney-square geometry.

pub mod ball;
pub mod bisect;
pub mod catalog;
pub mod error;
pub mod halfplane;
pub mod params;
pub mod quad;
pub mod scalar;
pub mod whitney;

pub use catalog::{BallPoint, Domain, FunctionKind, Monomial, TestFunction};
pub use error::{Error, Result};
pub use params::{BallParams, HalfPlaneParams, NormParams};
pub use scalar::{Real, C};

/// `f64` instantiations of the generic types.
pub type Complex = C<f64>;
pub type Function = TestFunction<f64>;
pub type HalfPlane = HalfPlaneParams<f64>;
pub type Ball = BallParams<f64>;
pub type Ladder = quad::TruncationLadder<f64>;
pub type Report = quad::LadderReport<f64>;
pub type Settings = quad::QuadSettings<f64>;
pub type Estimate = bisect::DistanceEstimate<f64>;

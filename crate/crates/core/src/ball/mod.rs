//! The unit ball of ℂⁿ for `n ∈ {1, 2}`.

pub mod geometry;
pub mod sampling;
pub mod distance;

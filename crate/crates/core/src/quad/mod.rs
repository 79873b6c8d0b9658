//! Quadrature: compensated summation, adaptive cubature and truncation ladders.

pub mod adaptive;
pub mod kahan;
pub mod ladder;
pub mod region;
pub mod rules;

pub use adaptive::{cubature, integrate_1d, Cubature, CubatureOptions, Rect};
pub use kahan::KahanSum;
pub use ladder::{
    classify, ladder_cubature, ladder_integrate, ClassifyOptions, ConvergenceVerdict, LadderPoint, LadderReport,
    LadderRow, LevelIntegrals, QuadSettings, RegionFamily, TruncationLadder,
};
pub use region::{integrate, Region, Sector};

//! The upper half-plane `ℂ₊`.

pub mod bergman;
pub mod distance;

//! Validated parameter bundles for the half-plane and ball distance theorems.
//!
//! Every inequality is strict and is rejected at equality. Constructors are the
//! only way to obtain a bundle, so downstream code may assume legality.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

fn violation(msg: String) -> Error {
    Error::HypothesisViolation(msg)
}

fn finite<T: Real>(name: &str, x: T) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(violation(format!("{name} must be finite, got {x}")))
    }
}

/// Half-plane parameters `(q, ν, t, β)` with `t = (ν + 2) / q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPlaneParams<T> {
    pub q: T,
    pub nu: T,
    pub t: T,
    pub beta: T,
}

impl<T: Real> HalfPlaneParams<T> {
    /// Lower bound that `beta` must strictly exceed for the given `(q, ν)`.
    pub fn beta_floor(q: T, nu: T) -> T {
        let two = T::lit(2.0);
        if q > T::one() {
            (nu / q).max((nu + two) / q - T::one())
        } else {
            (nu + two) / q - two
        }
    }

    pub fn validate(q: T, nu: T, beta: T) -> Result<Self> {
        finite("q", q)?;
        finite("nu", nu)?;
        finite("beta", beta)?;
        if !(q > T::zero()) {
            return Err(violation(format!("q > 0 required, got q = {q}")));
        }
        if !(nu > -T::one()) {
            return Err(violation(format!("nu > -1 required, got nu = {nu}")));
        }
        let floor = Self::beta_floor(q, nu);
        if !(beta > floor) {
            let rule = if q > T::one() {
                "beta > max(nu/q, (nu+2)/q - 1)"
            } else {
                "beta > (nu+2)/q - 2"
            };
            return Err(violation(format!("{rule} fails: beta = {beta}, bound = {floor}")));
        }
        let params = Self {
            q,
            nu,
            t: (nu + T::lit(2.0)) / q,
            beta,
        };
        // Legality of the kernel integral estimate with alpha = nu.
        if !((beta + T::lit(2.0)) * q - T::lit(2.0) > nu) {
            return Err(violation(format!(
                "(beta+2)q - 2 > nu fails for q = {q}, nu = {nu}, beta = {beta}"
            )));
        }
        Ok(params)
    }

    /// Re-run validation on an existing bundle.
    pub fn revalidate(&self) -> Result<Self> {
        Self::validate(self.q, self.nu, self.beta)
    }
}

/// Ball parameters `(n, q, s, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallParams<T> {
    pub n: usize,
    pub q: T,
    pub s: T,
    pub t: T,
}

impl<T: Real> BallParams<T> {
    pub fn validate(n: usize, q: T, s: T, t: T) -> Result<Self> {
        if n != 1 && n != 2 {
            return Err(Error::UnsupportedDimension(n));
        }
        finite("q", q)?;
        finite("s", s)?;
        finite("t", t)?;
        let nr = T::from_usize_lossy(n);
        if !(q > T::zero()) {
            return Err(violation(format!("q > 0 required, got q = {q}")));
        }
        if !(s * q > nr) {
            return Err(violation(format!("s*q > n fails: s*q = {}, n = {n}", s * q)));
        }
        if !(t > s) {
            return Err(violation(format!("t > s fails: t = {t}, s = {s}")));
        }
        if q <= T::one() {
            let lhs = q * (t + nr + T::one()) - (nr + T::one());
            if !(lhs > -T::one()) {
                return Err(violation(format!(
                    "q(t+n+1) - (n+1) > -1 fails: value {lhs}"
                )));
            }
        } else {
            let bound = (s + nr + T::one()) / q;
            if !(t > bound) {
                return Err(violation(format!("t > (s+n+1)/q fails: t = {t}, bound = {bound}")));
            }
        }
        Ok(Self { n, q, s, t })
    }

    pub fn revalidate(&self) -> Result<Self> {
        Self::validate(self.n, self.q, self.s, self.t)
    }
}

/// Norm parameters: either a Bergman pair `(p, α)` or a growth weight `ν`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "space", rename_all = "snake_case")]
pub enum NormParams<T> {
    Bergman { p: T, alpha: T },
    Growth { nu: T },
}

impl<T: Real> NormParams<T> {
    pub fn bergman(p: T, alpha: T) -> Result<Self> {
        finite("p", p)?;
        finite("alpha", alpha)?;
        if !(p > T::zero()) {
            return Err(violation(format!("p > 0 required, got p = {p}")));
        }
        if !(alpha > -T::one()) {
            return Err(violation(format!("alpha > -1 required, got alpha = {alpha}")));
        }
        Ok(Self::Bergman { p, alpha })
    }

    pub fn growth(nu: T) -> Result<Self> {
        finite("nu", nu)?;
        if !(nu > T::zero()) {
            return Err(violation(format!("nu > 0 required, got nu = {nu}")));
        }
        Ok(Self::Growth { nu })
    }
}

/// Smallest admissible `β` in the Bergman representation for `f ∈ A^p_α`:
/// `(2+α)/p − 2` when `p ≤ 1`, `(1+α)/p − 1` when `p ≥ 1` (non-strict).
pub fn representation_beta_floor<T: Real>(p: T, alpha: T) -> T {
    let two = T::lit(2.0);
    if p <= T::one() {
        (two + alpha) / p - two
    } else {
        (T::one() + alpha) / p - T::one()
    }
}

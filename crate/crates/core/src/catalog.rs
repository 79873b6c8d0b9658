//! Closed-form holomorphic test functions used as ground truth.
//!
//! Half-plane points are single complex numbers with `Im z > 0`. Ball points are
//! pairs `[z1, z2]`; in dimension one the second coordinate is always zero, so
//! every ball formula can be written once in ℂ².

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cpow, Real, C};

/// Point of the unit ball in ℂ² (second coordinate zero when `n = 1`).
pub type BallPoint<T> = [C<T>; 2];

/// Domain a test function lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "domain", rename_all = "snake_case")]
pub enum Domain {
    HalfPlane,
    Ball { n: usize },
}

/// One term `coeff · z1^a · z2^b` of a ball polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial<T> {
    /// `[re, im]`
    pub coeff: [T; 2],
    pub powers: [u32; 2],
}

/// The closed catalog of function shapes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionKind<T> {
    /// `(z + i)^(-a)` on ℂ₊.
    PowerShift { a: T },
    /// `z^(-t)` on ℂ₊, principal branch.
    PurePower { t: T },
    /// `(1 - ⟨z, e1⟩)^(-s)` on the ball, principal branch.
    BallPole { s: T },
    Constant { c: T },
    Zero,
    /// Polynomial in `(z1, z2)` on the ball.
    Polynomial { terms: Vec<Monomial<T>> },
}

/// A catalog function together with its domain and a real scale factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Deserialize<'de> + num_traits::One"))]
pub struct TestFunction<T> {
    #[serde(flatten)]
    pub domain: Domain,
    #[serde(flatten)]
    pub kind: FunctionKind<T>,
    #[serde(default = "one")]
    pub scale: T,
}

fn one<T: num_traits::One>() -> T {
    T::one()
}

fn out_of_domain(msg: impl Into<String>) -> Error {
    Error::OutOfDomain(msg.into())
}

fn check_dim(n: usize) -> Result<()> {
    if n == 1 || n == 2 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(n))
    }
}

impl<T: Real> TestFunction<T> {
    pub fn new(domain: Domain, kind: FunctionKind<T>) -> Result<Self> {
        let ok = match (&kind, domain) {
            (FunctionKind::PowerShift { .. } | FunctionKind::PurePower { .. }, Domain::HalfPlane) => true,
            (FunctionKind::BallPole { .. } | FunctionKind::Polynomial { .. }, Domain::Ball { n }) => {
                check_dim(n)?;
                true
            }
            (FunctionKind::Constant { .. } | FunctionKind::Zero, Domain::Ball { n }) => {
                check_dim(n)?;
                true
            }
            (FunctionKind::Constant { .. } | FunctionKind::Zero, Domain::HalfPlane) => true,
            _ => false,
        };
        if !ok {
            return Err(Error::HypothesisViolation(format!(
                "{kind:?} is not defined on {domain:?}"
            )));
        }
        if let FunctionKind::Polynomial { terms } = &kind {
            if matches!(domain, Domain::Ball { n: 1 }) && terms.iter().any(|m| m.powers[1] > 0) {
                return Err(Error::HypothesisViolation(
                    "z2 appears in a polynomial on the one-dimensional ball".into(),
                ));
            }
        }
        Ok(Self {
            domain,
            kind,
            scale: T::one(),
        })
    }

    pub fn power_shift(a: T) -> Self {
        Self::new(Domain::HalfPlane, FunctionKind::PowerShift { a }).unwrap()
    }

    pub fn pure_power(t: T) -> Self {
        Self::new(Domain::HalfPlane, FunctionKind::PurePower { t }).unwrap()
    }

    pub fn ball_pole(n: usize, s: T) -> Result<Self> {
        Self::new(Domain::Ball { n }, FunctionKind::BallPole { s })
    }

    pub fn constant(domain: Domain, c: T) -> Result<Self> {
        Self::new(domain, FunctionKind::Constant { c })
    }

    pub fn zero(domain: Domain) -> Result<Self> {
        Self::new(domain, FunctionKind::Zero)
    }

    pub fn polynomial(n: usize, terms: Vec<Monomial<T>>) -> Result<Self> {
        Self::new(Domain::Ball { n }, FunctionKind::Polynomial { terms })
    }

    /// `λ f` for real `λ`.
    pub fn scaled(&self, lambda: T) -> Self {
        let mut g = self.clone();
        g.scale = g.scale * lambda;
        g
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, FunctionKind::Zero) || self.scale == T::zero()
    }

    /// Ball dimension, if this is a ball function.
    pub fn ball_dim(&self) -> Option<usize> {
        match self.domain {
            Domain::Ball { n } => Some(n),
            Domain::HalfPlane => None,
        }
    }

    /// Value at a half-plane point.
    pub fn eval_plane(&self, z: C<T>) -> Result<C<T>> {
        if self.domain != Domain::HalfPlane {
            return Err(out_of_domain("half-plane evaluation of a ball function"));
        }
        if !(z.im > T::zero()) || !z.re.is_finite() || !z.im.is_finite() {
            return Err(out_of_domain(format!("Im z > 0 required, got {z}")));
        }
        Ok(self.eval_plane_unchecked(z))
    }

    /// Value at a half-plane point without domain checks; hot loops only.
    #[inline]
    pub fn eval_plane_unchecked(&self, z: C<T>) -> C<T> {
        let v = match &self.kind {
            FunctionKind::PowerShift { a } => cpow(z + C::new(T::zero(), T::one()), -*a),
            FunctionKind::PurePower { t } => cpow(z, -*t),
            FunctionKind::Constant { c } => C::new(*c, T::zero()),
            FunctionKind::Zero => C::new(T::zero(), T::zero()),
            // constructors keep ball kinds off the half-plane
            FunctionKind::BallPole { .. } | FunctionKind::Polynomial { .. } => {
                C::new(T::nan(), T::nan())
            }
        };
        v * self.scale
    }

    /// Value at a ball point.
    pub fn eval_ball(&self, z: &BallPoint<T>) -> Result<C<T>> {
        let n = match self.domain {
            Domain::Ball { n } => n,
            Domain::HalfPlane => return Err(out_of_domain("ball evaluation of a half-plane function")),
        };
        let r2 = z[0].norm_sqr() + z[1].norm_sqr();
        if !(r2 < T::one()) {
            return Err(out_of_domain(format!("|z|^2 = {r2} is not < 1")));
        }
        if n == 1 && z[1] != C::new(T::zero(), T::zero()) {
            return Err(out_of_domain("second coordinate must vanish for n = 1"));
        }
        Ok(self.eval_ball_unchecked(z))
    }

    #[inline]
    pub fn eval_ball_unchecked(&self, z: &BallPoint<T>) -> C<T> {
        let v = match &self.kind {
            FunctionKind::BallPole { s } => cpow(C::new(T::one(), T::zero()) - z[0], -*s),
            FunctionKind::Polynomial { terms } => terms.iter().fold(C::new(T::zero(), T::zero()), |acc, m| {
                acc + C::new(m.coeff[0], m.coeff[1])
                    * z[0].powu(m.powers[0])
                    * z[1].powu(m.powers[1])
            }),
            FunctionKind::Constant { c } => C::new(*c, T::zero()),
            FunctionKind::Zero => C::new(T::zero(), T::zero()),
            FunctionKind::PowerShift { .. } | FunctionKind::PurePower { .. } => C::new(T::nan(), T::nan()),
        };
        v * self.scale
    }

    /// Exact `sup |f| · w^weight` where `w = Im z` on ℂ₊ and `w = 1 − |z|²` on the
    /// ball. `Some(∞)` marks a function known to be unbounded in that norm; `None`
    /// means the catalog has no closed form.
    pub fn analytic_sup_norm(&self, weight: T) -> Option<T> {
        if weight < T::zero() {
            return None;
        }
        let scale = self.scale.abs();
        if self.is_zero() {
            return Some(T::zero());
        }
        let inf = T::infinity();
        let v = match (&self.kind, self.domain) {
            (FunctionKind::PurePower { t }, Domain::HalfPlane) => {
                // |z^{-t}| y^t = (sin arg z)^t
                if weight == *t {
                    T::one()
                } else {
                    inf
                }
            }
            (FunctionKind::PowerShift { a }, Domain::HalfPlane) => {
                // sup over x = 0: y^w (1 + y)^{-a}, maximised at y = w/(a - w)
                let a = *a;
                if weight > a {
                    inf
                } else if weight == a {
                    T::one()
                } else {
                    xlogx_pow(weight) * xlogx_pow(a - weight) / a.powf(a)
                }
            }
            (FunctionKind::Constant { c }, Domain::HalfPlane) => {
                if weight == T::zero() {
                    c.abs()
                } else {
                    inf
                }
            }
            (FunctionKind::Constant { c }, Domain::Ball { .. }) => c.abs(),
            (FunctionKind::BallPole { s: a }, Domain::Ball { .. }) => {
                // the radius through e1 dominates: (1-ρ)^{w-a} (1+ρ)^w
                let a = *a;
                let two = T::lit(2.0);
                if a <= T::zero() {
                    return None;
                }
                if weight < a {
                    inf
                } else if weight == a {
                    two.powf(a)
                } else {
                    let rho = a / (two * weight - a);
                    (T::one() - rho).powf(weight - a) * (T::one() + rho).powf(weight)
                }
            }
            _ => return None,
        };
        Some(v * scale)
    }

    /// Whether the function belongs to the half-plane space `A^p_α`.
    pub fn halfplane_membership(&self, p: T, alpha: T) -> Option<bool> {
        if self.domain != Domain::HalfPlane || !(alpha > -T::one()) || !(p > T::zero()) {
            return None;
        }
        if self.is_zero() {
            return Some(true);
        }
        match &self.kind {
            FunctionKind::PowerShift { a } => Some(*a * p > alpha + T::lit(2.0)),
            FunctionKind::PurePower { .. } | FunctionKind::Constant { .. } => Some(false),
            _ => None,
        }
    }

    /// Whether the function belongs to the ball space `A^p_s` (`s p > n`).
    pub fn ball_membership(&self, p: T, s: T) -> Option<bool> {
        let n = self.ball_dim()?;
        if !(s * p > T::from_usize_lossy(n)) {
            return None;
        }
        if self.is_zero() {
            return Some(true);
        }
        match &self.kind {
            FunctionKind::BallPole { s: a } => Some(s > *a),
            FunctionKind::Polynomial { .. } | FunctionKind::Constant { .. } => Some(true),
            _ => None,
        }
    }
}

/// `x^x` with `0^0 = 1`.
fn xlogx_pow<T: Real>(x: T) -> T {
    if x == T::zero() {
        T::one()
    } else {
        x.powf(x)
    }
}

/// Ball defining function `δ(z) = 1 − |z|²`.
#[inline]
pub fn ball_delta<T: Real>(z: &BallPoint<T>) -> T {
    T::one() - z[0].norm_sqr() - z[1].norm_sqr()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C<f64>, b: C<f64>, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn eval_examples() {
        let f = TestFunction::power_shift(2.0);
        assert!(close(f.eval_plane(C::new(0.0, 1.0)).unwrap(), C::new(-0.25, 0.0), 1e-15));
        let g = TestFunction::pure_power(1.0);
        assert!(close(g.eval_plane(C::new(0.0, 1.0)).unwrap(), C::new(0.0, -1.0), 1e-15));
        assert!(matches!(g.eval_plane(C::new(0.0, -1.0)), Err(Error::OutOfDomain(_))));
        assert!(matches!(g.eval_plane(C::new(3.0, 0.0)), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn ball_eval_and_domain() {
        let f = TestFunction::ball_pole(1, 1.0).unwrap();
        let z = [C::new(0.5, 0.0), C::new(0.0, 0.0)];
        assert!(close(f.eval_ball(&z).unwrap(), C::new(2.0, 0.0), 1e-15));
        assert!(f.eval_ball(&[C::new(1.0, 0.0), C::new(0.0, 0.0)]).is_err());
        assert!(f.eval_ball(&[C::new(0.1, 0.0), C::new(0.1, 0.0)]).is_err());
        assert!(f.eval_plane(C::new(0.0, 1.0)).is_err());
        let p = TestFunction::polynomial(
            2,
            vec![Monomial { coeff: [2.0, 0.0], powers: [1, 1] }, Monomial { coeff: [0.0, 1.0], powers: [0, 0] }],
        )
        .unwrap();
        let z = [C::new(0.3, 0.1), C::new(-0.2, 0.4)];
        let want = z[0] * z[1] * 2.0 + C::new(0.0, 1.0);
        assert!(close(p.eval_ball(&z).unwrap(), want, 1e-15));
    }

    #[test]
    fn catalog_rejects_mismatched_domain() {
        assert!(TestFunction::new(Domain::HalfPlane, FunctionKind::BallPole { s: 1.0 }).is_err());
        assert!(TestFunction::new(Domain::Ball { n: 1 }, FunctionKind::PurePower { t: 1.0 }).is_err());
        assert!(TestFunction::<f64>::ball_pole(3, 1.0).is_err());
    }

    #[test]
    fn analytic_sup_norms() {
        assert_eq!(TestFunction::pure_power(1.5).analytic_sup_norm(1.5), Some(1.0));
        assert_eq!(TestFunction::power_shift(1.0).analytic_sup_norm(1.0), Some(1.0));
        assert_eq!(TestFunction::power_shift(2.0).analytic_sup_norm(1.0), Some(0.25));
        assert_eq!(TestFunction::ball_pole(1, 1.0).unwrap().analytic_sup_norm(1.0), Some(2.0));
        assert_eq!(TestFunction::pure_power(1.0).analytic_sup_norm(2.0), Some(f64::INFINITY));
        assert_eq!(TestFunction::zero(Domain::HalfPlane).unwrap().analytic_sup_norm(1.0), Some(0.0));
        assert_eq!(TestFunction::power_shift(1.0).scaled(3.0).analytic_sup_norm(1.0), Some(3.0));
    }

    // Grid maxima never exceed the analytic value and approach it on refinement.
    #[test]
    fn sup_norm_grid_oracle_halfplane() {
        for (f, w) in [
            (TestFunction::pure_power(1.0), 1.0),
            (TestFunction::pure_power(2.5), 2.5),
            (TestFunction::power_shift(1.0), 1.0),
            (TestFunction::power_shift(2.0), 1.0),
            (TestFunction::power_shift(3.0), 0.5),
        ] {
            let exact = f.analytic_sup_norm(w).unwrap();
            let mut prev = 0.0;
            for (nr, nt) in [(41, 21), (161, 81), (641, 321)] {
                let mut best: f64 = 0.0;
                for i in 0..nr {
                    let r = 2f64.powf(-12.0 + 32.0 * i as f64 / (nr - 1) as f64);
                    for j in 1..=nt {
                        let th = std::f64::consts::PI * j as f64 / (nt + 1) as f64;
                        let z = C::from_polar(r, th);
                        best = best.max(f.eval_plane(z).unwrap().norm() * z.im.powf(w));
                    }
                }
                assert!(best <= exact * (1.0 + 1e-12), "{f:?}: grid {best} > exact {exact}");
                assert!(best >= prev - 1e-15);
                prev = best;
            }
            assert!((exact - prev) / exact < 2e-3, "{f:?}: {prev} vs {exact}");
        }
    }

    #[test]
    fn sup_norm_grid_oracle_ball() {
        for (a, s) in [(1.0, 1.0), (0.5, 1.0), (1.0, 2.0)] {
            let f = TestFunction::ball_pole(1, a).unwrap();
            let exact = f.analytic_sup_norm(s).unwrap();
            let mut best: f64 = 0.0;
            for i in 0..400 {
                let delta = 2f64.powf(-20.0 * i as f64 / 399.0);
                let rho = (1.0 - delta).sqrt();
                for j in 0..256 {
                    let th = 2.0 * std::f64::consts::PI * j as f64 / 256.0;
                    let z = [C::from_polar(rho, th), C::new(0.0, 0.0)];
                    let v = f.eval_ball(&z).unwrap().norm() * ball_delta(&z).powf(s);
                    best = best.max(v);
                }
            }
            assert!(best <= exact * (1.0 + 1e-12));
            assert!((exact - best) / exact < 1e-2, "a={a} s={s}: {best} vs {exact}");
        }
    }

    #[test]
    fn membership_flags() {
        assert_eq!(TestFunction::power_shift(2.0).halfplane_membership(2.0, 0.0), Some(true));
        assert_eq!(TestFunction::power_shift(1.0).halfplane_membership(2.0, 0.0), Some(false));
        assert_eq!(TestFunction::pure_power(1.0).halfplane_membership(2.0, 0.0), Some(false));
        let half = TestFunction::ball_pole(1, 0.5).unwrap();
        assert_eq!(half.ball_membership(2.0, 1.0), Some(true));
        let one = TestFunction::ball_pole(1, 1.0).unwrap();
        assert_eq!(one.ball_membership(2.0, 1.0), Some(false));
    }

    #[test]
    fn serde_shape() {
        let k: FunctionKind<f64> = serde_json::from_str(r#"{"kind":"power_shift","a":2.0}"#).unwrap();
        assert_eq!(k, FunctionKind::PowerShift { a: 2.0 });
        let f: TestFunction<f64> =
            serde_json::from_str(r#"{"domain":"ball","n":1,"kind":"ball_pole","s":0.5}"#).unwrap();
        assert_eq!(f, TestFunction::ball_pole(1, 0.5).unwrap());
        let back: TestFunction<f64> = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(back, f);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn pure_power_homogeneity(t in 0.1f64..4.0, lam in 0.01f64..100.0,
                                      r in 0.01f64..100.0, th in 0.01f64..3.13) {
                let f = TestFunction::pure_power(t);
                let z = C::from_polar(r, th);
                let lhs = f.eval_plane(z * lam).unwrap();
                let rhs = f.eval_plane(z).unwrap() * lam.powf(-t);
                prop_assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1e-300));
            }

            #[test]
            fn weighted_modulus_below_sup(a in 0.2f64..4.0, frac in 0.0f64..=1.0,
                                          x in -50.0f64..50.0, y in 1e-4f64..1e3) {
                let f = TestFunction::power_shift(a);
                let w = a * frac;
                let v = f.eval_plane(C::new(x, y)).unwrap().norm() * y.powf(w);
                prop_assert!(v <= f.analytic_sup_norm(w).unwrap() * (1.0 + 1e-12));
            }
        }
    }
}

//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Point of the complex plane.
pub type C<T> = Complex<T>;

/// Principal power `z^e` for real `e`, with `0^e = 0` for `e > 0`.
#[inline]
pub fn cpow<T: Real>(z: C<T>, e: T) -> C<T> {
    if z.re == T::zero() && z.im == T::zero() {
        return if e == T::zero() {
            C::new(T::one(), T::zero())
        } else {
            C::new(T::zero(), T::zero())
        };
    }
    if e.fract() == T::zero() && e.abs() <= T::lit(64.0) {
        // integer powers are single valued
        return z.powi(e.to_i32().unwrap_or(0));
    }
    let (r, theta) = z.to_polar();
    C::from_polar(r.powf(e), theta * e)
}

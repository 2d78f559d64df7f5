//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::FftNum;

/// Real scalar type the core math is generic over (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + FftNum
    + 'static
{
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Sum
        + Default
        + Debug
        + Display
        + LowerExp
        + Send
        + Sync
        + FftNum
        + 'static
{
}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("literal representable in scalar type")
}

#[inline]
pub fn from_usize<R: Real>(n: usize) -> R {
    R::from_usize(n).expect("index representable in scalar type")
}

#[inline]
pub fn imag_unit<R: Real>() -> Complex<R> {
    Complex::new(R::zero(), R::one())
}

/// `√(i/2) = e^{iπ/4}/√2`.
#[inline]
pub fn sqrt_i_over_2<R: Real>() -> Complex<R> {
    Complex::from_polar(R::FRAC_1_SQRT_2(), R::FRAC_PI_4())
}

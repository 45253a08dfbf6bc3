//! Floating-point scalar abstraction.
//!
//! All numerical code in this crate is generic over [`Real`], which is any
//! IEEE float carrying the `num-traits` capabilities we rely on (transcendental
//! functions, float constants, conversion from `f64` literals). `f32` and
//! `f64` both qualify; concrete aliases for the `f64` instantiation live at
//! the crate root.

use num_traits::{Float, FloatConst, FromPrimitive};

/// Scalar type for all geometry and integration: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + core::fmt::Debug + core::fmt::Display + 'static
{
    /// Shorthand for bringing an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Lossy view as `f64`, used for diagnostics and error payloads.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    #[inline]
    fn two() -> Self {
        Self::lit(2.0)
    }
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + core::fmt::Debug + core::fmt::Display + 'static
{
}

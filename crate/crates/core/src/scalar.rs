//! Floating-point scalar abstraction: f32 or f64.

/// Scalar type the cascade math is generic over.
///
/// Everything downstream (distributions, integrators, planners) works for any
/// type satisfying these bounds; `f64` is the default used by the concrete
/// aliases at the crate root.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + std::fmt::Debug
    + std::fmt::Display
    + serde::Serialize
    + Send
    + Sync
    + 'static
{
}

impl<T> Real for T where
    T: num_traits::Float
        + num_traits::FromPrimitive
        + std::fmt::Debug
        + std::fmt::Display
        + serde::Serialize
        + Send
        + Sync
        + 'static
{
}

/// Converts an `f64` constant into the working scalar type.
#[inline]
pub fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("constant not representable in scalar type")
}

/// Converts the working scalar into `f64` (for error reports and RNG plumbing).
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    num_traits::ToPrimitive::to_f64(&x).unwrap_or(f64::NAN)
}

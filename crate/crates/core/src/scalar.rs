//! Scalar abstraction shared by every module.

use nalgebra as na;
use num_traits as nt;

/// Real scalar the toolkit is generic over (`f32`, `f64`).
pub trait Real: Copy + Send + Sync + nt::FromPrimitive + nt::ToPrimitive + na::RealField {}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("representable literal")
}

/// Lossy conversion to `f64`, used for reports and error payloads.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

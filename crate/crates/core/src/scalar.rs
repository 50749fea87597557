//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumCast};

/// Floating-point type the analysis can run on (`f32` or `f64`).
pub trait Scalar:
    Float + FromPrimitive + NumCast + Debug + Display + Default + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + NumCast + Debug + Display + Default + Send + Sync + 'static
{
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

/// Converts an integer count into `T`.
#[inline]
pub fn count<T: Scalar>(n: u64) -> T {
    T::from_u64(n).expect("count representable in scalar type")
}

#[inline]
pub fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Rounds half away from zero to `decimals` places.
pub fn round_to<T: Scalar>(x: T, decimals: u32) -> T {
    let scale = lit::<T>(10f64.powi(decimals as i32));
    (x * scale).round() / scale
}

/// Arithmetic mean; `None` for an empty slice.
pub fn mean<T: Scalar>(values: &[T]) -> Option<T> {
    if values.is_empty() {
        return None;
    }
    let sum = values.iter().fold(T::zero(), |acc, &v| acc + v);
    Some(sum / count::<T>(values.len() as u64))
}

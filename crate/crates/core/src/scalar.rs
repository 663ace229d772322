//! Scalar abstraction for the numeric core.

use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point scalar the crate is generic over: `f32` or `f64`.
///
/// `nalgebra::RealField` supplies the field operations and transcendentals
/// used by the geometry; the `num-traits` conversions bridge config values
/// and literals, which are always written as `f64`.
pub trait Real: nalgebra::RealField + FromPrimitive + ToPrimitive + Copy + Default {
    /// Convert an `f64` constant (config value, literal) into `Self`.
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("finite f64 constant")
    }

    /// Widen to `f64` for reporting and formatting.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("real scalar widens to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Clamp a scaled feature into the unit interval.
pub fn clamp_unit<T: Real>(value: T) -> T {
    value.clamp(T::zero(), T::one())
}

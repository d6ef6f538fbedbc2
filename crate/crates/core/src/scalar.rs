//! Floating-point abstraction shared by every solver.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar the solvers are generic over: `f32` or `f64`.
///
/// Tolerances in option structs are stored as `T`, so a default such as
/// `1e-12` silently rounds up to the type's resolution for `f32`. Use
/// [`Real::tol`] when a threshold must stay meaningful at lower precision.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only on NaN-producing conversions,
    /// which cannot happen for the finite constants used in this crate.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 literal converts to Real")
    }

    /// `max(v, k * epsilon)`: a tolerance that never drops below what the
    /// type can resolve.
    #[inline]
    fn tol(v: f64, k: f64) -> Self {
        Self::lit(v).max(Self::epsilon() * Self::lit(k))
    }

    /// Smallest density value treated as nonzero (`1e-300`, or the smallest
    /// normal value if the type cannot represent it).
    #[inline]
    fn density_floor() -> Self {
        Self::lit(1e-300).max(Self::min_positive_value())
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

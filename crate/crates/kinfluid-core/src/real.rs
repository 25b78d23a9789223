//! Scalar abstraction used throughout the crate.
//!
//! All numerics are written against [`Real`] so the same code runs in `f32`
//! and `f64`. Concrete aliases live at the crate root.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

/// Floating-point scalar the solvers are generic over.
///
/// The supertraits cover everything the kernels need: IEEE arithmetic,
/// conversions from literals, accumulation, and thread-safe sharing.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + num_traits::NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`, for literals and precomputed tables.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts to any Real")
    }

    /// Lossy conversion to `f64`, for reporting and cross-checks.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("Real converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

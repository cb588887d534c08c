//! Floating-point abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar the bandit and design code is generic over: `f32` or `f64`.
///
/// Numerical tolerances are associated with the type so that the single
/// precision build does not inherit thresholds below its machine epsilon.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Relative singular-value cutoff used to decide numerical rank.
    fn rank_tol() -> Self;
    /// Smallest admissible ratio `lambda_min / lambda_max` for a PD solve.
    fn cond_tol() -> Self;
    /// Relative residual above which a vector counts as leaving a span.
    fn span_tol() -> Self;

    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar converts to f64")
    }
}

impl Scalar for f64 {
    fn rank_tol() -> Self {
        1e-9
    }
    fn cond_tol() -> Self {
        1e-10
    }
    fn span_tol() -> Self {
        1e-8
    }
}

impl Scalar for f32 {
    fn rank_tol() -> Self {
        1e-5
    }
    fn cond_tol() -> Self {
        1e-6
    }
    fn span_tol() -> Self {
        1e-4
    }
}

use crate::bandit::LinearBanditInstance;
use crate::error::Result;
use crate::scalar::Scalar;

/// Star-network error bound `4 log₂K · exp(−T M Δ² / (32 d log₂K))`.
///
/// Returned as-is even when it exceeds 1.
pub fn theorem1_bound(budget: f64, agents: f64, dim: f64, arms: f64, delta_min: f64) -> f64 {
    let lk = arms.log2();
    4.0 * lk * (-budget * agents * delta_min * delta_min / (32.0 * dim * lk)).exp()
}

/// Generic-network error bound `8 log₂K · exp(−T Δ² / (32 d log₂K))`; no
/// dependence on the number of agents or partition blocks.
pub fn theorem2_bound(budget: f64, dim: f64, arms: f64, delta_min: f64) -> f64 {
    2.0 * theorem1_bound(budget, 1.0, dim, arms, delta_min)
}

/// Magnitude `T / (H log₂ d)` of the minimax lower-bound exponent, with the
/// unknown constant taken as 1. For `d = 1` the logarithm is clamped to 1.
pub fn lower_bound_exponent<T: Scalar>(inst: &LinearBanditInstance<T>, budget: f64) -> Result<f64> {
    let h = inst.hardness()?.as_f64();
    let ld = (inst.dim() as f64).log2().max(1.0);
    Ok(budget / (h * ld))
}

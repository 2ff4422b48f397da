//! Interest-weighted normalised uncertainty reduction.

use crate::belief::{MapBelief, UncertaintyVariant};
use crate::error::{IppError, Result};
use crate::grid::InterestSpec;
use crate::scalar::Real;
use crate::unified::interest_grid;

/// `Σ_x (H_t(x) − H_{t+1}(x)) / H_t(x) · p_I(x)`; cells with `H_t(x) = 0` contribute nothing.
pub fn weighted_reduction<T: Real>(before: &[T], after: &[T], interest: &[T]) -> T {
    debug_assert!(before.len() == after.len() && before.len() == interest.len());
    let mut total = T::zero();
    for ((b, a), p) in before.iter().zip(after).zip(interest) {
        if *b != T::zero() {
            total += (*b - *a) / *b * *p;
        }
    }
    total
}

/// Unweighted `Σ_x (H_t(x) − H_{t+1}(x)) / H_t(x)`, the pure-exploration reward.
pub fn exploration_reduction<T: Real>(before: &[T], after: &[T]) -> T {
    let mut total = T::zero();
    for (b, a) in before.iter().zip(after) {
        if *b != T::zero() {
            total += (*b - *a) / *b;
        }
    }
    total
}

/// Reward of moving the map from `before` to `after`.
///
/// Uncertainty is the variance for Gaussian maps and the exponential Shannon
/// entropy for occupancy maps; interest probabilities come from `before`.
pub fn step_reward<T: Real>(before: &MapBelief<T>, after: &MapBelief<T>, spec: &InterestSpec<T>) -> Result<T> {
    if before.geometry() != after.geometry() || before.is_gaussian() != after.is_gaussian() {
        return Err(IppError::config("reward needs two beliefs of the same kind and geometry"));
    }
    let interest = interest_grid(before, spec)?;
    let h0 = before.uncertainty_grid(UncertaintyVariant::Reward);
    let h1 = after.uncertainty_grid(UncertaintyVariant::Reward);
    Ok(weighted_reduction(&h0, &h1, &interest))
}

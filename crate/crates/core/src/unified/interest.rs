use crate::belief::MapBelief;
use crate::error::{IppError, Result};
use crate::grid::InterestSpec;
use crate::scalar::Real;

use super::normal::normal_sf;

/// Standard deviations at or below this are treated as a point mass.
pub const DEGENERATE_STD: f64 = 1e-12;

/// Probability that a cell's feature lies in the interesting set.
///
/// Occupancy maps sum the class probabilities of the interesting classes.
/// Gaussian maps integrate the marginal above the threshold,
/// `1 − Φ((f_th − μ) / σ)`. A spec covering the whole feature space gives
/// exactly 1 for either map.
pub fn interest_probability<T: Real>(belief: &MapBelief<T>, spec: &InterestSpec<T>, cell: usize) -> Result<T> {
    check_kinds(belief, spec)?;
    Ok(interest_unchecked(belief, spec, cell, spec.class_mask().as_deref()))
}

/// Interest probability of every cell, row-major.
pub fn interest_grid<T: Real>(belief: &MapBelief<T>, spec: &InterestSpec<T>) -> Result<Vec<T>> {
    check_kinds(belief, spec)?;
    let mask = spec.class_mask();
    Ok((0..belief.geometry().len())
        .map(|c| interest_unchecked(belief, spec, c, mask.as_deref()))
        .collect())
}

fn check_kinds<T: Real>(belief: &MapBelief<T>, spec: &InterestSpec<T>) -> Result<()> {
    match (belief, spec) {
        (MapBelief::Gaussian(_), InterestSpec::Threshold { .. }) => Ok(()),
        (MapBelief::Occupancy(b), InterestSpec::Classes { classes, .. }) if b.classes() == *classes => Ok(()),
        (MapBelief::Occupancy(b), InterestSpec::Classes { classes, .. }) => Err(IppError::config(format!(
            "interest spec has {classes} classes, map has {}",
            b.classes()
        ))),
        _ => Err(IppError::config("interest spec kind does not match map kind")),
    }
}

fn interest_unchecked<T: Real>(belief: &MapBelief<T>, spec: &InterestSpec<T>, cell: usize, mask: Option<&[bool]>) -> T {
    if spec.is_full_space() {
        return T::one();
    }
    match (belief, spec) {
        (MapBelief::Gaussian(b), InterestSpec::Threshold { threshold, .. }) => {
            let mu = b.mean()[cell];
            let sigma = b.variance(cell).max(T::zero()).sqrt();
            if sigma <= T::lit(DEGENERATE_STD) {
                if mu >= *threshold {
                    T::one()
                } else {
                    T::zero()
                }
            } else {
                normal_sf((*threshold - mu) / sigma)
            }
        }
        (MapBelief::Occupancy(b), InterestSpec::Classes { .. }) => {
            let mask = mask.expect("class mask");
            b.cell(cell)
                .iter()
                .zip(mask)
                .filter(|(_, m)| **m)
                .map(|(p, _)| *p)
                .sum::<T>()
                .min(T::one())
        }
        _ => unreachable!("kinds checked"),
    }
}

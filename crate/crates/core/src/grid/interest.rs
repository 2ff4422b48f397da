use serde::{Deserialize, Serialize};

use super::{FieldValues, TerrainField};
use crate::error::{IppError, Result};
use crate::scalar::Real;

/// Which feature values count as interesting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum InterestSpec<T> {
    /// Values in `[threshold, upper]` of the feature domain `[lower, upper]`.
    Threshold { threshold: T, lower: T, upper: T },
    /// A non-empty subset of the class ids `1..=classes`, sorted and unique.
    Classes { interesting: Vec<u16>, classes: u16 },
}

impl<T: Real> InterestSpec<T> {
    pub fn threshold(threshold: T, domain: (T, T)) -> Result<Self> {
        let (lower, upper) = domain;
        if !(lower <= threshold && threshold <= upper) {
            return Err(IppError::config(format!(
                "threshold {threshold} outside feature domain [{lower}, {upper}]"
            )));
        }
        Ok(InterestSpec::Threshold { threshold, lower, upper })
    }

    pub fn classes(interesting: impl IntoIterator<Item = u16>, classes: u16) -> Result<Self> {
        if classes < 2 {
            return Err(IppError::config(format!("need at least 2 classes, got {classes}")));
        }
        let mut set: Vec<u16> = interesting.into_iter().collect();
        set.sort_unstable();
        set.dedup();
        if set.is_empty() {
            return Err(IppError::config("interesting class set is empty"));
        }
        if let Some(c) = set.iter().find(|c| **c == 0 || **c > classes) {
            return Err(IppError::config(format!("interesting class {c} outside 1..={classes}")));
        }
        Ok(InterestSpec::Classes { interesting: set, classes })
    }

    /// Every feature value is interesting, i.e. pure exploration.
    pub fn is_full_space(&self) -> bool {
        match self {
            InterestSpec::Threshold { threshold, lower, .. } => *threshold <= *lower,
            InterestSpec::Classes { interesting, classes } => interesting.len() == *classes as usize,
        }
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self, InterestSpec::Threshold { .. })
    }

    pub fn threshold_value(&self) -> Option<T> {
        match self {
            InterestSpec::Threshold { threshold, .. } => Some(*threshold),
            InterestSpec::Classes { .. } => None,
        }
    }

    pub fn interesting_classes(&self) -> Option<&[u16]> {
        match self {
            InterestSpec::Classes { interesting, .. } => Some(interesting),
            InterestSpec::Threshold { .. } => None,
        }
    }

    /// Membership mask over class ids, indexed by `class - 1`.
    pub(crate) fn class_mask(&self) -> Option<Vec<bool>> {
        match self {
            InterestSpec::Classes { interesting, classes } => {
                let mut mask = vec![false; *classes as usize];
                for c in interesting {
                    mask[(*c - 1) as usize] = true;
                }
                Some(mask)
            }
            InterestSpec::Threshold { .. } => None,
        }
    }
}

/// Ground-truth areas of interest: cells whose feature lies in the interesting set.
pub fn interest_mask<T: Real>(field: &TerrainField<T>, spec: &InterestSpec<T>) -> Result<Vec<bool>> {
    match (field.values(), spec) {
        (FieldValues::Continuous { values, .. }, InterestSpec::Threshold { threshold, .. }) => {
            Ok(values.iter().map(|v| *v >= *threshold).collect())
        }
        (FieldValues::Discrete { labels, classes }, InterestSpec::Classes { classes: k, .. }) => {
            if classes != k {
                return Err(IppError::config(format!(
                    "interest spec has {k} classes but field has {classes}"
                )));
            }
            let mask = spec.class_mask().expect("class spec");
            Ok(labels.iter().map(|l| mask[(*l - 1) as usize]).collect())
        }
        _ => Err(IppError::config("interest spec kind does not match field kind")),
    }
}

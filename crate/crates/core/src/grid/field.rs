use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::GridGeometry;
use crate::error::{IppError, Result};
use crate::scalar::Real;

/// Per-cell ground truth values.
#[derive(Clone, Debug, PartialEq)]
pub enum FieldValues<T> {
    /// Real features within `[lower, upper]`.
    Continuous { values: Vec<T>, lower: T, upper: T },
    /// Class labels in `1..=classes`.
    Discrete { labels: Vec<u16>, classes: u16 },
}

/// Ground-truth feature field over a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct TerrainField<T> {
    geometry: GridGeometry,
    values: FieldValues<T>,
}

impl<T: Real> TerrainField<T> {
    pub fn continuous(geometry: GridGeometry, values: Vec<T>, lower: T, upper: T) -> Result<Self> {
        if values.len() != geometry.len() {
            return Err(IppError::config("field length does not match grid"));
        }
        if !(lower <= upper) {
            return Err(IppError::config("field bounds must satisfy lower <= upper"));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= lower && **v <= upper)) {
            return Err(IppError::config(format!(
                "field value {v} outside [{lower}, {upper}]"
            )));
        }
        Ok(TerrainField {
            geometry,
            values: FieldValues::Continuous { values, lower, upper },
        })
    }

    pub fn discrete(geometry: GridGeometry, labels: Vec<u16>, classes: u16) -> Result<Self> {
        if classes < 2 {
            return Err(IppError::config(format!("need at least 2 classes, got {classes}")));
        }
        if labels.len() != geometry.len() {
            return Err(IppError::config("label grid length does not match grid"));
        }
        if let Some(l) = labels.iter().find(|l| **l == 0 || **l > classes) {
            return Err(IppError::config(format!("label {l} outside 1..={classes}")));
        }
        Ok(TerrainField {
            geometry,
            values: FieldValues::Discrete { labels, classes },
        })
    }

    pub fn geometry(&self) -> GridGeometry {
        self.geometry
    }

    pub fn values(&self) -> &FieldValues<T> {
        &self.values
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self.values, FieldValues::Continuous { .. })
    }

    /// Continuous values, if this is a continuous field.
    pub fn continuous_values(&self) -> Option<&[T]> {
        match &self.values {
            FieldValues::Continuous { values, .. } => Some(values),
            FieldValues::Discrete { .. } => None,
        }
    }

    /// Class labels, if this is a discrete field.
    pub fn labels(&self) -> Option<&[u16]> {
        match &self.values {
            FieldValues::Discrete { labels, .. } => Some(labels),
            FieldValues::Continuous { .. } => None,
        }
    }

    pub fn class_count(&self) -> Option<u16> {
        match self.values {
            FieldValues::Discrete { classes, .. } => Some(classes),
            FieldValues::Continuous { .. } => None,
        }
    }

    /// Feature domain `(f_a, f_b)` of a continuous field.
    pub fn bounds(&self) -> Option<(T, T)> {
        match self.values {
            FieldValues::Continuous { lower, upper, .. } => Some((lower, upper)),
            FieldValues::Discrete { .. } => None,
        }
    }
}

/// Seeded, spatially correlated field rescaled to span exactly `[0, 1]`.
///
/// White Gaussian noise on a padded grid is convolved with an isotropic
/// Gaussian kernel whose standard deviation is `correlation_length` in
/// unit-square coordinates.
pub fn generate_continuous_field<T: Real>(
    seed: u64,
    geometry: GridGeometry,
    correlation_length: f64,
) -> Result<TerrainField<T>> {
    let smooth = smoothed_noise(seed, geometry, correlation_length)?;
    let values = rescale_unit(&smooth);
    TerrainField::continuous(geometry, values, T::zero(), T::one())
}

/// Seeded class field built by cutting a correlated continuous field at its
/// `k / classes` quantiles, so each class forms contiguous blobs.
pub fn generate_discrete_field<T: Real>(
    seed: u64,
    geometry: GridGeometry,
    classes: u16,
    correlation_length: f64,
) -> Result<TerrainField<T>> {
    if classes < 2 {
        return Err(IppError::config(format!("need at least 2 classes, got {classes}")));
    }
    let smooth = smoothed_noise(seed, geometry, correlation_length)?;
    let mut sorted = smooth.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let cuts: Vec<f64> = (1..classes as usize)
        .map(|k| sorted[(k * n / classes as usize).min(n - 1)])
        .collect();
    let labels = smooth
        .iter()
        .map(|v| 1 + cuts.iter().filter(|c| **c <= *v).count() as u16)
        .collect();
    TerrainField::discrete(geometry, labels, classes)
}

fn smoothed_noise(seed: u64, geometry: GridGeometry, correlation_length: f64) -> Result<Vec<f64>> {
    if !(correlation_length > 0.0 && correlation_length <= 2.0) {
        return Err(IppError::config(format!(
            "correlation length must lie in (0, 2], got {correlation_length}"
        )));
    }
    let (w, h) = (geometry.width(), geometry.height());
    let sigma = correlation_length / geometry.cell_size();
    let radius = ((3.0 * sigma).ceil() as usize).clamp(1, w.max(h));
    let kernel: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let d = i as f64 - radius as f64;
            (-0.5 * d * d / (sigma * sigma)).exp()
        })
        .collect();
    let ksum: f64 = kernel.iter().sum();
    let kernel: Vec<f64> = kernel.iter().map(|k| k / ksum).collect();

    let (pw, ph) = (w + 2 * radius, h + 2 * radius);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<f64> = (0..pw * ph).map(|_| StandardNormal.sample(&mut rng)).collect();

    // Horizontal pass: padded rows -> w columns.
    let mut rows = vec![0.0; w * ph];
    for y in 0..ph {
        let src = &noise[y * pw..(y + 1) * pw];
        for x in 0..w {
            rows[y * w + x] = kernel.iter().zip(&src[x..]).map(|(k, v)| k * v).sum();
        }
    }
    // Vertical pass: ph rows -> h rows.
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = kernel
                .iter()
                .enumerate()
                .map(|(i, k)| k * rows[(y + i) * w + x])
                .sum();
        }
    }
    Ok(out)
}

/// Affine map onto `[0, 1]`; a constant input maps to 0.5.
pub(crate) fn rescale_unit<T: Real>(values: &[f64]) -> Vec<T> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return vec![T::lit(0.5); values.len()];
    }
    let (lo, span) = (T::lit(lo), T::lit(hi) - T::lit(lo));
    values
        .iter()
        .map(|v| ((T::lit(*v) - lo) / span).max(T::zero()).min(T::one()))
        .collect()
}

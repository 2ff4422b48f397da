//! Simulated onboard sensors over a square, border-clipped field of view.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{IppError, Result};
use crate::grid::{FieldValues, GridGeometry, TerrainField};
use crate::scalar::Real;

pub use crate::grid::Pose;

/// Square `(2h+1) x (2h+1)` window centred on the robot, clipped at the grid border.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldOfView {
    pub half_extent: usize,
}

impl FieldOfView {
    pub const fn new(half_extent: usize) -> Self {
        FieldOfView { half_extent }
    }

    /// Row-major cell indices covered from `pose`.
    pub fn cells(&self, geometry: GridGeometry, pose: Pose) -> Vec<usize> {
        let h = self.half_extent;
        let (x0, x1) = (pose.x.saturating_sub(h), (pose.x + h).min(geometry.width() - 1));
        let (y0, y1) = (pose.y.saturating_sub(h), (pose.y + h).min(geometry.height() - 1));
        let mut out = Vec::with_capacity((x1 - x0 + 1) * (y1 - y0 + 1));
        for y in y0..=y1 {
            for x in x0..=x1 {
                out.push(geometry.index(x, y));
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuousSensorModel {
    pub noise_std: f64,
}

impl ContinuousSensorModel {
    pub fn new(noise_std: f64) -> Result<Self> {
        if !(noise_std >= 0.0 && noise_std.is_finite()) {
            return Err(IppError::config(format!("noise std must be >= 0, got {noise_std}")));
        }
        Ok(ContinuousSensorModel { noise_std })
    }
}

/// Row-stochastic `K x K` matrix, entry `(i, j)` = p(observe class j | true class i).
#[derive(Clone, Debug, PartialEq)]
pub struct ConfusionMatrix<T> {
    classes: u16,
    entries: Vec<T>,
}

impl<T: Real> ConfusionMatrix<T> {
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let k = rows.len();
        if k < 2 {
            return Err(IppError::config("confusion matrix needs at least 2 classes"));
        }
        let tol = T::lit(1e-9).max(T::epsilon() * T::from_count(4 * k));
        let mut entries = Vec::with_capacity(k * k);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(IppError::config(format!("confusion row {i} has {} entries, expected {k}", row.len())));
            }
            if row.iter().any(|p| !(*p >= T::zero())) {
                return Err(IppError::config(format!("confusion row {i} has a negative entry")));
            }
            let sum: T = row.iter().copied().sum();
            if (sum - T::one()).abs() > tol {
                return Err(IppError::config(format!("confusion row {i} sums to {sum}")));
            }
            entries.extend_from_slice(row);
        }
        Ok(ConfusionMatrix { classes: k as u16, entries })
    }

    /// `accuracy` on the diagonal, the rest spread uniformly off-diagonal.
    pub fn uniform_noise(classes: u16, accuracy: T) -> Result<Self> {
        if classes < 2 {
            return Err(IppError::config("confusion matrix needs at least 2 classes"));
        }
        if !(accuracy >= T::zero() && accuracy <= T::one()) {
            return Err(IppError::config(format!("accuracy {accuracy} outside [0, 1]")));
        }
        let k = classes as usize;
        let off = (T::one() - accuracy) / T::from_count(k - 1);
        let rows: Vec<Vec<T>> = (0..k)
            .map(|i| (0..k).map(|j| if i == j { accuracy } else { off }).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn identity(classes: u16) -> Result<Self> {
        Self::uniform_noise(classes, T::one())
    }

    pub fn classes(&self) -> u16 {
        self.classes
    }

    /// p(observe `observed` | true `truth`), both 1-based.
    #[inline]
    pub fn likelihood(&self, truth: u16, observed: u16) -> T {
        let k = self.classes as usize;
        self.entries[(truth as usize - 1) * k + observed as usize - 1]
    }

    pub fn row(&self, truth: u16) -> &[T] {
        let k = self.classes as usize;
        let start = (truth as usize - 1) * k;
        &self.entries[start..start + k]
    }
}

/// Observed values for one sensing step.
#[derive(Clone, Debug, PartialEq)]
pub enum Readings<T> {
    Values(Vec<(usize, T)>),
    Classes(Vec<(usize, u16)>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Measurement<T> {
    pub timestamp: usize,
    pub readings: Readings<T>,
}

impl<T> Measurement<T> {
    pub fn values(timestamp: usize, values: Vec<(usize, T)>) -> Self {
        Measurement { timestamp, readings: Readings::Values(values) }
    }

    pub fn classes(timestamp: usize, classes: Vec<(usize, u16)>) -> Self {
        Measurement { timestamp, readings: Readings::Classes(classes) }
    }

    pub fn len(&self) -> usize {
        match &self.readings {
            Readings::Values(v) => v.len(),
            Readings::Classes(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cells(&self) -> Vec<usize> {
        match &self.readings {
            Readings::Values(v) => v.iter().map(|(c, _)| *c).collect(),
            Readings::Classes(c) => c.iter().map(|(c, _)| *c).collect(),
        }
    }
}

/// Noisy point samples `z = F(x) + N(0, noise_std^2)` at every FoV cell, unclamped.
pub fn sense_continuous<T: Real, R: Rng + ?Sized>(
    field: &TerrainField<T>,
    pose: Pose,
    fov: FieldOfView,
    model: &ContinuousSensorModel,
    rng: &mut R,
) -> Result<Measurement<T>> {
    let values = match field.values() {
        FieldValues::Continuous { values, .. } => values,
        FieldValues::Discrete { .. } => {
            return Err(IppError::config("continuous sensor needs a continuous field"))
        }
    };
    let geometry = field.geometry();
    geometry.check_pose(pose)?;
    let std = T::lit(model.noise_std);
    let samples = fov
        .cells(geometry, pose)
        .into_iter()
        .map(|c| {
            let z: f64 = StandardNormal.sample(rng);
            (c, values[c] + std * T::lit(z))
        })
        .collect();
    Ok(Measurement::values(0, samples))
}

/// Semantic image: per FoV cell, a class drawn from the confusion row of the true class.
pub fn sense_semantic<T: Real, R: Rng + ?Sized>(
    field: &TerrainField<T>,
    pose: Pose,
    fov: FieldOfView,
    confusion: &ConfusionMatrix<T>,
    rng: &mut R,
) -> Result<Measurement<T>> {
    let (labels, classes) = match field.values() {
        FieldValues::Discrete { labels, classes } => (labels, *classes),
        FieldValues::Continuous { .. } => {
            return Err(IppError::config("semantic sensor needs a discrete field"))
        }
    };
    if classes != confusion.classes() {
        return Err(IppError::config(format!(
            "confusion matrix is {0}x{0} but field has {classes} classes",
            confusion.classes()
        )));
    }
    let geometry = field.geometry();
    geometry.check_pose(pose)?;
    let observed = fov
        .cells(geometry, pose)
        .into_iter()
        .map(|c| {
            let u: f64 = rng.random();
            (c, draw_class(confusion.row(labels[c]), u))
        })
        .collect();
    Ok(Measurement::classes(0, observed))
}

fn draw_class<T: Real>(row: &[T], u: f64) -> u16 {
    let mut acc = 0.0;
    let mut last_positive = 1;
    for (j, p) in row.iter().enumerate() {
        let p = p.as_f64();
        if p > 0.0 {
            last_positive = j as u16 + 1;
        }
        acc += p;
        if u < acc {
            return j as u16 + 1;
        }
    }
    // rounding left u >= total mass
    last_positive
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::generate_continuous_field;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn const_field(value: f64, side: usize) -> TerrainField<f64> {
        let g = GridGeometry::square(side).unwrap();
        TerrainField::continuous(g, vec![value; g.len()], 0.0, 1.0).unwrap()
    }

    #[test]
    fn zero_noise_reproduces_ground_truth() {
        let g = GridGeometry::square(10).unwrap();
        let field = generate_continuous_field::<f64>(4, g, 0.2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = sense_continuous(&field, Pose::new(4, 4), FieldOfView::new(2), &ContinuousSensorModel::new(0.0).unwrap(), &mut rng).unwrap();
        let truth = field.continuous_values().unwrap();
        let Readings::Values(v) = &m.readings else { panic!() };
        assert_eq!(v.len(), 25);
        assert!(v.iter().all(|(c, z)| *z == truth[*c]));
    }

    #[test]
    fn point_fov_samples_robot_cell() {
        let field = const_field(0.3, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = sense_continuous(&field, Pose::new(2, 3), FieldOfView::new(0), &ContinuousSensorModel::new(0.1).unwrap(), &mut rng).unwrap();
        assert_eq!(m.cells(), vec![17]);
    }

    #[test]
    fn empirical_noise_std() {
        let field = const_field(0.5, 3);
        let model = ContinuousSensorModel::new(0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let samples: Vec<f64> = (0..10_000)
            .map(|_| {
                let m = sense_continuous(&field, Pose::new(1, 1), FieldOfView::new(0), &model, &mut rng).unwrap();
                let Readings::Values(v) = m.readings else { unreachable!() };
                v[0].1
            })
            .collect();
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        let std = (samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (samples.len() - 1) as f64).sqrt();
        assert!((0.095..=0.105).contains(&std), "std {std}");
    }

    #[test]
    fn fov_clipped_at_corner() {
        let g = GridGeometry::square(6).unwrap();
        assert_eq!(FieldOfView::new(1).cells(g, Pose::new(0, 0)), vec![0, 1, 6, 7]);
        assert_eq!(FieldOfView::new(1).cells(g, Pose::new(3, 3)).len(), 9);
        assert_eq!(FieldOfView::new(10).cells(g, Pose::new(3, 3)).len(), 36);
    }

    #[test]
    fn identity_confusion_is_exact() {
        let g = GridGeometry::square(4).unwrap();
        let labels: Vec<u16> = (0..16).map(|i| (i % 3) as u16 + 1).collect();
        let field = TerrainField::<f64>::discrete(g, labels.clone(), 3).unwrap();
        let cm = ConfusionMatrix::identity(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = sense_semantic(&field, Pose::new(1, 1), FieldOfView::new(5), &cm, &mut rng).unwrap();
        let Readings::Classes(obs) = m.readings else { panic!() };
        assert_eq!(obs.len(), 16);
        assert!(obs.iter().all(|(c, k)| labels[*c] == *k));
    }

    #[test]
    fn confusion_row_frequencies() {
        let g = GridGeometry::square(2).unwrap();
        let field = TerrainField::<f64>::discrete(g, vec![1; 4], 3).unwrap();
        let cm = ConfusionMatrix::<f64>::uniform_noise(3, 0.8).unwrap();
        assert!(cm.row(1).iter().zip([0.8, 0.1, 0.1]).all(|(a, b)| (a - b).abs() < 1e-15));
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut hits = 0;
        for _ in 0..10_000 {
            let m = sense_semantic(&field, Pose::new(0, 0), FieldOfView::new(0), &cm, &mut rng).unwrap();
            let Readings::Classes(obs) = m.readings else { unreachable!() };
            hits += (obs[0].1 == 1) as usize;
        }
        let freq = hits as f64 / 10_000.0;
        assert!((0.78..=0.82).contains(&freq), "{freq}");
    }

    #[test]
    fn kind_and_dimension_mismatches() {
        let field = const_field(0.5, 3);
        let cm = ConfusionMatrix::<f64>::identity(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sense_semantic(&field, Pose::new(0, 0), FieldOfView::new(1), &cm, &mut rng).is_err());
        let g = GridGeometry::square(3).unwrap();
        let d = TerrainField::<f64>::discrete(g, vec![1; 9], 2).unwrap();
        assert!(sense_semantic(&d, Pose::new(0, 0), FieldOfView::new(1), &cm, &mut rng).is_err());
        let model = ContinuousSensorModel::new(0.1).unwrap();
        assert!(sense_continuous(&d, Pose::new(0, 0), FieldOfView::new(1), &model, &mut rng).is_err());
        assert!(ContinuousSensorModel::new(-1.0).is_err());
        assert!(ConfusionMatrix::from_rows(&[vec![0.5, 0.4], vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn identical_streams_give_identical_measurements() {
        let field = const_field(0.5, 8);
        let model = ContinuousSensorModel::new(0.2).unwrap();
        let sense = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            sense_continuous(&field, Pose::new(3, 3), FieldOfView::new(1), &model, &mut rng).unwrap()
        };
        assert_eq!(sense(11), sense(11));
    }
}

//! Probabilistic terrain maps and their per-cell uncertainty.

mod gaussian;
mod kernel;
mod occupancy;

pub use gaussian::{gp_fuse, gp_init, GaussianMapBelief, PRIOR_JITTER};
pub use kernel::{kernel_eval, MaternKernel};
pub use occupancy::{occ_fuse, occ_init, shannon_entropy, OccupancyMapBelief, ProbabilityClamp};
pub(crate) use occupancy::{argmax_class, bayes_update};

use std::path::Path;

use crate::error::{IppError, Result};
use crate::grid::GridGeometry;
use crate::layers::{Layer, LayeredGrid};
use crate::scalar::Real;
use crate::sensors::{ConfusionMatrix, Measurement};

/// Either map back-end.
#[derive(Clone, Debug, PartialEq)]
pub enum MapBelief<T> {
    Gaussian(GaussianMapBelief<T>),
    Occupancy(OccupancyMapBelief<T>),
}

/// Which uncertainty measure to report for a cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UncertaintyVariant {
    /// Variance (Gaussian) or Shannon entropy in nats (occupancy).
    StateSpace,
    /// Variance (Gaussian) or exponential Shannon entropy (occupancy).
    Reward,
}

impl<T: Real> MapBelief<T> {
    pub fn geometry(&self) -> GridGeometry {
        match self {
            MapBelief::Gaussian(b) => b.geometry(),
            MapBelief::Occupancy(b) => b.geometry(),
        }
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self, MapBelief::Gaussian(_))
    }

    pub fn as_gaussian(&self) -> Option<&GaussianMapBelief<T>> {
        match self {
            MapBelief::Gaussian(b) => Some(b),
            MapBelief::Occupancy(_) => None,
        }
    }

    pub fn as_occupancy(&self) -> Option<&OccupancyMapBelief<T>> {
        match self {
            MapBelief::Occupancy(b) => Some(b),
            MapBelief::Gaussian(_) => None,
        }
    }

    /// Fuses a measurement; occupancy maps need the sensor confusion matrix.
    pub fn fuse_in_place(&mut self, m: &Measurement<T>, confusion: Option<&ConfusionMatrix<T>>) -> Result<()> {
        match self {
            MapBelief::Gaussian(b) => b.fuse_in_place(m),
            MapBelief::Occupancy(b) => {
                let cm = confusion.ok_or_else(|| IppError::config("occupancy fusion needs a confusion matrix"))?;
                b.fuse_in_place(m, cm)
            }
        }
    }

    pub fn uncertainty_grid(&self, variant: UncertaintyVariant) -> Vec<T> {
        (0..self.geometry().len())
            .map(|c| cell_uncertainty(self, c, variant))
            .collect()
    }

    /// Mean/variance layers or one probability layer per class.
    pub fn to_layers(&self) -> LayeredGrid<T> {
        let width = self.geometry().width();
        let layers = match self {
            MapBelief::Gaussian(b) => vec![
                Layer { name: "mean".into(), width, values: b.mean().to_vec() },
                Layer { name: "variance".into(), width, values: b.variances() },
            ],
            MapBelief::Occupancy(b) => (1..=b.classes())
                .map(|f| Layer {
                    name: format!("class_{f}"),
                    width,
                    values: (0..b.geometry().len()).map(|c| b.cell(c)[f as usize - 1]).collect(),
                })
                .collect(),
        };
        LayeredGrid { layers, scalars: Vec::new() }
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_layers().to_csv())?;
        Ok(())
    }
}

pub fn cell_uncertainty<T: Real>(belief: &MapBelief<T>, cell: usize, variant: UncertaintyVariant) -> T {
    match belief {
        MapBelief::Gaussian(b) => b.variance(cell),
        MapBelief::Occupancy(b) => {
            let h = shannon_entropy(b.cell(cell));
            match variant {
                UncertaintyVariant::StateSpace => h,
                UncertaintyVariant::Reward => h.exp(),
            }
        }
    }
}

//! Terrain grids: geometry, ground-truth fields, raster ingestion and areas of interest.

mod field;
mod interest;
mod raster;

pub use field::{generate_continuous_field, generate_discrete_field, FieldValues, TerrainField};
pub use interest::{interest_mask, InterestSpec};
pub use raster::{load_raster, parse_csv_grid, parse_pgm, RasterKind};

use serde::{Deserialize, Serialize};

use crate::error::{IppError, Result};

/// Equidistant grid laid over the unit square.
///
/// Cells are indexed row-major with row 0 at the north edge. The longer side
/// spans `[0, 1]`, so cell size is `1 / max(width, height)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridGeometry {
    width: usize,
    height: usize,
}

impl GridGeometry {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width < 2 || height < 2 {
            return Err(IppError::config(format!(
                "grid must be at least 2x2, got {width}x{height}"
            )));
        }
        Ok(GridGeometry { width, height })
    }

    pub fn square(side: usize) -> Result<Self> {
        Self::new(side, side)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_size(&self) -> f64 {
        1.0 / self.width.max(self.height) as f64
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        debug_assert!(x < self.width && y < self.height);
        y * self.width + x
    }

    #[inline]
    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index % self.width, index / self.width)
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    /// Center of a cell in unit-square coordinates.
    pub fn cell_center(&self, index: usize) -> [f64; 2] {
        let (x, y) = self.coords(index);
        let s = self.cell_size();
        [(x as f64 + 0.5) * s, (y as f64 + 0.5) * s]
    }

    /// Cell whose center is nearest to a unit-square point, clamped into the grid.
    pub fn nearest_cell(&self, point: [f64; 2]) -> Pose {
        let s = self.cell_size();
        let snap = |v: f64, n: usize| -> usize {
            let c = (v / s - 0.5).round();
            if c.is_nan() || c < 0.0 {
                0
            } else {
                (c as usize).min(n - 1)
            }
        };
        Pose::new(snap(point[0], self.width), snap(point[1], self.height))
    }

    pub fn pose_index(&self, pose: Pose) -> usize {
        self.index(pose.x, pose.y)
    }

    pub fn check_pose(&self, pose: Pose) -> Result<()> {
        if pose.x < self.width && pose.y < self.height {
            Ok(())
        } else {
            Err(IppError::config(format!(
                "pose ({}, {}) outside {}x{} grid",
                pose.x, pose.y, self.width, self.height
            )))
        }
    }
}

/// Robot position on the grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pose {
    pub x: usize,
    pub y: usize,
}

impl Pose {
    pub const fn new(x: usize, y: usize) -> Self {
        Pose { x, y }
    }
}

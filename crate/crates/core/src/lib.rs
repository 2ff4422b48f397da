//! Unified planning state for informative path planning over 2D terrain.
//!
//! A mission maps a synthetic field with a noisy sensor. Either a Gaussian
//! process map (continuous values) or an occupancy map (semantic classes)
//! holds the belief. Both reduce to the same planning state: a per-cell
//! probability of being interesting, a per-cell uncertainty, the robot pose,
//! the remaining budget and the task hyperparameters. Planners only ever see
//! that state, the belief and one reward, so they work unchanged on either map.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix it to `f64`.

pub mod belief;
pub mod error;
pub mod grid;
pub mod layers;
pub mod linalg;
pub mod metrics;
pub mod optim;
pub mod planning;
pub mod reward;
pub mod scalar;
pub mod sensors;
pub mod unified;

pub use error::{IppError, Result};
pub use grid::{GridGeometry, Pose};
pub use planning::{Action, Planner, PlannerConfig};
pub use scalar::Real;

pub type GaussianMap = belief::GaussianMapBelief<f64>;
pub type OccupancyMap = belief::OccupancyMapBelief<f64>;
pub type Map = belief::MapBelief<f64>;
pub type Field = grid::TerrainField<f64>;
pub type Interest = grid::InterestSpec<f64>;
pub type State = unified::UnifiedState<f64>;
pub type Confusion = sensors::ConfusionMatrix<f64>;
pub type Lookahead = planning::LookaheadBelief<f64>;

pub type GaussianMapF32 = belief::GaussianMapBelief<f32>;
pub type OccupancyMapF32 = belief::OccupancyMapBelief<f32>;
pub type MapF32 = belief::MapBelief<f32>;

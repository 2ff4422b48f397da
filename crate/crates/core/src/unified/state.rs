use std::path::Path;

use serde::{Deserialize, Serialize};

use super::interest::interest_grid;
use crate::belief::{MapBelief, UncertaintyVariant};
use crate::error::{IppError, Result};
use crate::grid::{GridGeometry, InterestSpec, Pose};
use crate::layers::{Layer, LayeredGrid};
use crate::scalar::Real;

/// Mission hyperparameters exposed to planners.
///
/// `lengthscale` is the Gaussian map's kernel lengthscale; occupancy maps
/// assume spatially independent cells and encode it as 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams<T> {
    pub threshold: Option<T>,
    pub interesting_classes: Option<Vec<u16>>,
    pub lengthscale: T,
}

impl<T: Real> Hyperparams<T> {
    pub fn new(spec: &InterestSpec<T>, belief: &MapBelief<T>) -> Result<Self> {
        let lengthscale = match belief {
            MapBelief::Gaussian(b) => b.kernel().lengthscale,
            MapBelief::Occupancy(_) => T::zero(),
        };
        let hp = match spec {
            InterestSpec::Threshold { threshold, .. } => Hyperparams {
                threshold: Some(*threshold),
                interesting_classes: None,
                lengthscale,
            },
            InterestSpec::Classes { interesting, .. } => Hyperparams {
                threshold: None,
                interesting_classes: Some(interesting.clone()),
                lengthscale,
            },
        };
        hp.validate(belief.is_gaussian())?;
        Ok(hp)
    }

    fn validate(&self, gaussian: bool) -> Result<()> {
        if self.threshold.is_some() == self.interesting_classes.is_some() {
            return Err(IppError::config("exactly one of threshold or interesting classes must be set"));
        }
        if gaussian != (self.lengthscale > T::zero()) {
            return Err(IppError::config("lengthscale encoding must be 0 exactly for occupancy maps"));
        }
        Ok(())
    }
}

/// Planning state over the full grid: interest probability and map
/// uncertainty per cell, plus pose, remaining budget and hyperparameters.
#[derive(Clone, Debug, PartialEq)]
pub struct UnifiedState<T> {
    pub geometry: GridGeometry,
    pub interest: Vec<T>,
    pub uncertainty: Vec<T>,
    pub pose: Pose,
    pub remaining_budget: T,
    pub hyperparams: Hyperparams<T>,
}

pub fn assemble_state<T: Real>(
    belief: &MapBelief<T>,
    spec: &InterestSpec<T>,
    pose: Pose,
    remaining_budget: T,
    hyperparams: Hyperparams<T>,
) -> Result<UnifiedState<T>> {
    let geometry = belief.geometry();
    geometry.check_pose(pose)?;
    if !(remaining_budget >= T::zero()) {
        return Err(IppError::config(format!("remaining budget {remaining_budget} is negative")));
    }
    hyperparams.validate(belief.is_gaussian())?;
    Ok(UnifiedState {
        geometry,
        interest: interest_grid(belief, spec)?,
        uncertainty: belief.uncertainty_grid(UncertaintyVariant::StateSpace),
        pose,
        remaining_budget,
        hyperparams,
    })
}

impl<T: Real> UnifiedState<T> {
    pub fn to_layers(&self) -> LayeredGrid<T> {
        let w = self.geometry.width();
        let hp = &self.hyperparams;
        let classes = hp
            .interesting_classes
            .as_ref()
            .map(|c| c.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";"))
            .unwrap_or_default();
        LayeredGrid {
            layers: vec![
                Layer { name: "interest".into(), width: w, values: self.interest.clone() },
                Layer { name: "uncertainty".into(), width: w, values: self.uncertainty.clone() },
            ],
            scalars: vec![
                ("pose_x".into(), self.pose.x.to_string()),
                ("pose_y".into(), self.pose.y.to_string()),
                ("remaining_budget".into(), self.remaining_budget.to_string()),
                ("threshold".into(), hp.threshold.map(|t| t.to_string()).unwrap_or_default()),
                ("lengthscale".into(), hp.lengthscale.to_string()),
                ("interesting_classes".into(), classes),
            ],
        }
    }

    pub fn from_layers(grid: &LayeredGrid<T>) -> Result<Self> {
        let bad = |what: &str| IppError::ingestion(format!("state raster: {what}"));
        let interest = grid.layer("interest").ok_or_else(|| bad("missing interest layer"))?;
        let uncertainty = grid.layer("uncertainty").ok_or_else(|| bad("missing uncertainty layer"))?;
        if interest.width == 0 || interest.values.len() != uncertainty.values.len() || interest.width != uncertainty.width {
            return Err(bad("layer shapes differ"));
        }
        let geometry = GridGeometry::new(interest.width, interest.values.len() / interest.width)
            .map_err(|e| bad(&e.to_string()))?;
        let scalar = |k: &str| grid.scalar(k).ok_or_else(|| bad(&format!("missing scalar {k}")));
        let int = |k: &str| scalar(k)?.parse::<usize>().map_err(|_| bad(&format!("bad {k}")));
        let real = |s: &str, k: &str| s.parse::<f64>().map(T::lit).map_err(|_| bad(&format!("bad {k}")));
        let threshold = match scalar("threshold")? {
            "" => None,
            s => Some(real(s, "threshold")?),
        };
        let interesting_classes = match scalar("interesting_classes")? {
            "" => None,
            s => Some(
                s.split(';')
                    .map(|c| c.parse::<u16>().map_err(|_| bad("bad interesting class")))
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        Ok(UnifiedState {
            geometry,
            interest: interest.values.clone(),
            uncertainty: uncertainty.values.clone(),
            pose: Pose::new(int("pose_x")?, int("pose_y")?),
            remaining_budget: real(scalar("remaining_budget")?, "remaining_budget")?,
            hyperparams: Hyperparams {
                threshold,
                interesting_classes,
                lengthscale: real(scalar("lengthscale")?, "lengthscale")?,
            },
        })
    }
}

/// Writes the state as layered CSV: interest layer, uncertainty layer, scalar row.
pub fn export_state_raster<T: Real>(state: &UnifiedState<T>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, state.to_layers().to_csv())?;
    Ok(())
}

pub fn read_state_raster<T: Real>(path: impl AsRef<Path>) -> Result<UnifiedState<T>> {
    let text = std::fs::read_to_string(path)?;
    UnifiedState::from_layers(&LayeredGrid::parse(&text)?)
}

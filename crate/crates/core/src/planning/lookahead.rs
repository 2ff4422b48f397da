//! Cheap simulated belief updates for planning.
//!
//! Simulated measurements are the expected ones: the predicted mean for
//! Gaussian maps, the current argmax class for occupancy maps. The Gaussian
//! mean therefore never moves and only the covariance is tracked, as a
//! low-rank downdate `P − U Uᵀ` of the live covariance.

use std::sync::Arc;

use crate::belief::{argmax_class, bayes_update, GaussianMapBelief, MapBelief, ProbabilityClamp, UncertaintyVariant};
use crate::error::{IppError, Result};
use crate::grid::{GridGeometry, Pose};
use crate::linalg::cholesky_in_place;
use crate::reward::weighted_reduction;
use crate::scalar::Real;
use crate::sensors::{ConfusionMatrix, FieldOfView};

/// Sensor description used for simulated measurements.
#[derive(Clone, Debug, PartialEq)]
pub struct LookaheadModel<T> {
    pub fov: FieldOfView,
    /// Required for occupancy maps.
    pub confusion: Option<ConfusionMatrix<T>>,
}

#[derive(Clone, Debug)]
enum Kind<T> {
    Gaussian {
        base: Arc<GaussianMapBelief<T>>,
        /// Blocks of factor columns, one block per simulated measurement,
        /// each `n x cols` column-major. Shared between clones.
        factor: Vec<Arc<Vec<T>>>,
    },
    Occupancy {
        probs: Vec<T>,
        classes: usize,
        clamp: ProbabilityClamp<T>,
        confusion: Arc<ConfusionMatrix<T>>,
    },
}

/// A belief that can be advanced by simulated measurements.
#[derive(Clone, Debug)]
pub struct LookaheadBelief<T> {
    geometry: GridGeometry,
    fov: FieldOfView,
    interest: Arc<Vec<T>>,
    uncertainty: Vec<T>,
    kind: Kind<T>,
}

impl<T: Real> LookaheadBelief<T> {
    /// `interest` stays frozen for the whole lookahead.
    pub fn new(belief: &MapBelief<T>, interest: Vec<T>, model: &LookaheadModel<T>) -> Result<Self> {
        let geometry = belief.geometry();
        if interest.len() != geometry.len() {
            return Err(IppError::config("interest grid does not match the map"));
        }
        let kind = match belief {
            MapBelief::Gaussian(b) => Kind::Gaussian { base: Arc::new(b.clone()), factor: Vec::new() },
            MapBelief::Occupancy(b) => {
                let cm = model
                    .confusion
                    .clone()
                    .ok_or_else(|| IppError::config("occupancy lookahead needs a confusion matrix"))?;
                if cm.classes() != b.classes() {
                    return Err(IppError::config("confusion matrix does not match the map classes"));
                }
                Kind::Occupancy {
                    probs: b.probabilities().to_vec(),
                    classes: b.classes() as usize,
                    clamp: b.clamp().clone(),
                    confusion: Arc::new(cm),
                }
            }
        };
        Ok(LookaheadBelief {
            geometry,
            fov: model.fov,
            interest: Arc::new(interest),
            uncertainty: belief.uncertainty_grid(UncertaintyVariant::Reward),
            kind,
        })
    }

    pub fn geometry(&self) -> GridGeometry {
        self.geometry
    }

    /// Reward-variant uncertainty per cell.
    pub fn uncertainty(&self) -> &[T] {
        &self.uncertainty
    }

    pub fn interest(&self) -> &[T] {
        &self.interest
    }

    /// Reward earned going from `self` to `next`.
    pub fn reward_to(&self, next: &Self) -> T {
        weighted_reduction(&self.uncertainty, &next.uncertainty, &self.interest)
    }

    /// Senses from `pose` in place and returns the reward earned.
    pub fn advance(&mut self, pose: Pose) -> Result<T> {
        self.geometry.check_pose(pose)?;
        let cells = self.fov.cells(self.geometry, pose);
        let before = self.uncertainty.clone();
        match &mut self.kind {
            Kind::Gaussian { base, factor } => {
                let block = gaussian_downdate(base, factor, &mut self.uncertainty, &cells)?;
                factor.push(Arc::new(block));
            }
            Kind::Occupancy { probs, classes, clamp, confusion } => {
                let k = *classes;
                for &c in &cells {
                    let p = &mut probs[c * k..(c + 1) * k];
                    let observed = argmax_class(p);
                    bayes_update(p, confusion, observed, clamp);
                    self.uncertainty[c] = crate::belief::shannon_entropy(p).exp();
                }
            }
        }
        Ok(weighted_reduction(&before, &self.uncertainty, &self.interest))
    }

    /// Copy of `self` after sensing from `pose`.
    pub fn simulate_update(&self, pose: Pose) -> Result<Self> {
        let mut next = self.clone();
        next.advance(pose)?;
        Ok(next)
    }
}

/// Copy of `look` after a simulated measurement from `pose`.
pub fn simulate_update<T: Real>(look: &LookaheadBelief<T>, pose: Pose) -> Result<LookaheadBelief<T>> {
    look.simulate_update(pose)
}

/// New factor columns `V` such that `P − U Uᵀ − V Vᵀ` is the posterior
/// covariance after observing `cells`; also refreshes the variances.
fn gaussian_downdate<T: Real>(
    base: &GaussianMapBelief<T>,
    factor: &[Arc<Vec<T>>],
    variances: &mut [T],
    cells: &[usize],
) -> Result<Vec<T>> {
    let n = base.geometry().len();
    let c = cells.len();
    // G[:, j] = (P − U Uᵀ)[:, cells[j]]
    let mut g = vec![T::zero(); n * c];
    for (j, &cj) in cells.iter().enumerate() {
        g[j * n..(j + 1) * n].copy_from_slice(base.cov_row(cj));
    }
    for block in factor {
        for u in block.chunks_exact(n) {
            for (j, &cj) in cells.iter().enumerate() {
                let w = u[cj];
                if w != T::zero() {
                    for (gi, ui) in g[j * n..(j + 1) * n].iter_mut().zip(u) {
                        *gi -= w * *ui;
                    }
                }
            }
        }
    }
    let mut s = vec![T::zero(); c * c];
    for a in 0..c {
        for b in 0..=a {
            let v = g[b * n + cells[a]];
            s[a * c + b] = v;
            s[b * c + a] = v;
        }
        s[a * c + a] += base.noise_variance();
    }
    cholesky_in_place(&mut s, c).map_err(|_| IppError::numerical("singular innovation matrix in lookahead"))?;
    // V = G L⁻ᵀ, computed in place column by column
    for j in 0..c {
        let (done, rest) = g.split_at_mut(j * n);
        let col = &mut rest[..n];
        for q in 0..j {
            let l = s[j * c + q];
            if l != T::zero() {
                for (vi, pi) in col.iter_mut().zip(&done[q * n..(q + 1) * n]) {
                    *vi -= l * *pi;
                }
            }
        }
        let d = s[j * c + j];
        for (vi, var) in col.iter_mut().zip(variances.iter_mut()) {
            *vi /= d;
            *var = (*var - *vi * *vi).max(T::zero());
        }
    }
    Ok(g)
}

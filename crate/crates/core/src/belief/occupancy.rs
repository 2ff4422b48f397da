use crate::error::{IppError, Result};
use crate::grid::GridGeometry;
use crate::scalar::Real;
use crate::sensors::{ConfusionMatrix, Measurement, Readings};

/// Per-cell categorical distribution over `classes` semantic classes.
#[derive(Clone, Debug, PartialEq)]
pub struct OccupancyMapBelief<T> {
    geometry: GridGeometry,
    classes: u16,
    /// `n x K`, row-major.
    probs: Vec<T>,
    clamp: ProbabilityClamp<T>,
}

/// Bounds applied to every class probability after a Bayes update.
///
/// The upper bound is exact. The effective lower bound is
/// `min(p_min, (1 - p_max) / (K - 1))`, the largest floor that still lets one
/// class sit at `p_max`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbabilityClamp<T> {
    pub p_min: T,
    pub p_max: T,
    floor: T,
}

impl<T: Real> ProbabilityClamp<T> {
    pub fn new(p_min: T, p_max: T, classes: u16) -> Result<Self> {
        let uniform = T::one() / T::from_count(classes as usize);
        if classes < 2 || !(T::zero() < p_min && p_min < uniform && uniform < p_max && p_max < T::one()) {
            return Err(IppError::config(format!(
                "clamp ({p_min}, {p_max}) must satisfy 0 < p_min < 1/K < p_max < 1 for K = {classes}"
            )));
        }
        let floor = p_min.min((T::one() - p_max) / T::from_count(classes as usize - 1));
        Ok(ProbabilityClamp { p_min, p_max, floor })
    }

    pub fn floor(&self) -> T {
        self.floor
    }

    /// Projects a normalised distribution into `[floor, p_max]` keeping unit mass:
    /// out-of-bound entries are pinned and the remaining entries rescaled, until
    /// nothing violates the bounds.
    pub(crate) fn apply(&self, p: &mut [T]) {
        let k = p.len();
        let mut pinned = vec![false; k];
        for _ in 0..=k {
            let mut changed = false;
            for i in 0..k {
                if pinned[i] {
                    continue;
                }
                if p[i] > self.p_max {
                    p[i] = self.p_max;
                    pinned[i] = true;
                    changed = true;
                } else if p[i] < self.floor {
                    p[i] = self.floor;
                    pinned[i] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
            let fixed: T = (0..k).filter(|i| pinned[*i]).map(|i| p[i]).sum();
            let free = (0..k).filter(|i| !pinned[*i]).count();
            if free == 0 {
                break;
            }
            let target = T::one() - fixed;
            let mass: T = (0..k).filter(|i| !pinned[*i]).map(|i| p[i]).sum();
            for i in (0..k).filter(|i| !pinned[*i]) {
                p[i] = if mass > T::zero() {
                    p[i] * target / mass
                } else {
                    target / T::from_count(free)
                };
            }
        }
    }
}

impl<T: Real> OccupancyMapBelief<T> {
    pub fn geometry(&self) -> GridGeometry {
        self.geometry
    }

    pub fn classes(&self) -> u16 {
        self.classes
    }

    pub fn clamp(&self) -> &ProbabilityClamp<T> {
        &self.clamp
    }

    pub fn probabilities(&self) -> &[T] {
        &self.probs
    }

    /// Class distribution of one cell; entry `f - 1` holds class `f`.
    #[inline]
    pub fn cell(&self, cell: usize) -> &[T] {
        let k = self.classes as usize;
        &self.probs[cell * k..(cell + 1) * k]
    }

    /// Most probable class (1-based), lowest id on ties.
    pub fn argmax(&self, cell: usize) -> u16 {
        argmax_class(self.cell(cell))
    }

    pub fn fuse(&self, m: &Measurement<T>, confusion: &ConfusionMatrix<T>) -> Result<Self> {
        let mut next = self.clone();
        next.fuse_in_place(m, confusion)?;
        Ok(next)
    }

    pub fn fuse_in_place(&mut self, m: &Measurement<T>, confusion: &ConfusionMatrix<T>) -> Result<()> {
        let obs = match &m.readings {
            Readings::Classes(c) => c,
            Readings::Values(_) => {
                return Err(IppError::config("occupancy map cannot fuse real-valued observations"))
            }
        };
        if confusion.classes() != self.classes {
            return Err(IppError::config(format!(
                "confusion matrix has {} classes, map has {}",
                confusion.classes(),
                self.classes
            )));
        }
        let n = self.geometry.len();
        for (cell, class) in obs {
            if *cell >= n {
                return Err(IppError::config(format!("observed cell {cell} outside grid")));
            }
            if *class == 0 || *class > self.classes {
                return Err(IppError::config(format!("observed class {class} outside 1..={}", self.classes)));
            }
        }
        let k = self.classes as usize;
        for (cell, class) in obs {
            let p = &mut self.probs[cell * k..(cell + 1) * k];
            bayes_update(p, confusion, *class, &self.clamp);
        }
        Ok(())
    }
}

/// `p'(f) ∝ p(f) · C[f, observed]`, renormalised, then clamped.
pub(crate) fn bayes_update<T: Real>(p: &mut [T], confusion: &ConfusionMatrix<T>, observed: u16, clamp: &ProbabilityClamp<T>) {
    let mut total = T::zero();
    for (f, pf) in p.iter_mut().enumerate() {
        *pf *= confusion.likelihood(f as u16 + 1, observed);
        total += *pf;
    }
    if !(total > T::zero()) {
        // observation impossible under every class; p is all zero now, restore uniform
        let u = T::one() / T::from_count(p.len());
        p.iter_mut().for_each(|pf| *pf = u);
        return;
    }
    p.iter_mut().for_each(|pf| *pf /= total);
    clamp.apply(p);
}

pub(crate) fn argmax_class<T: Real>(p: &[T]) -> u16 {
    let mut best = 0;
    for (i, v) in p.iter().enumerate() {
        if *v > p[best] {
            best = i;
        }
    }
    best as u16 + 1
}

/// Shannon entropy in nats.
pub fn shannon_entropy<T: Real>(p: &[T]) -> T {
    p.iter()
        .filter(|v| **v > T::zero())
        .map(|v| -*v * v.ln())
        .sum()
}

/// Uniform prior over `classes` in every cell.
pub fn occ_init<T: Real>(geometry: GridGeometry, classes: u16, clamp: (T, T)) -> Result<OccupancyMapBelief<T>> {
    let clamp = ProbabilityClamp::new(clamp.0, clamp.1, classes)?;
    let u = T::one() / T::from_count(classes as usize);
    Ok(OccupancyMapBelief {
        geometry,
        classes,
        probs: vec![u; geometry.len() * classes as usize],
        clamp,
    })
}

pub fn occ_fuse<T: Real>(
    belief: &OccupancyMapBelief<T>,
    m: &Measurement<T>,
    confusion: &ConfusionMatrix<T>,
) -> Result<OccupancyMapBelief<T>> {
    belief.fuse(m, confusion)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn map(side: usize) -> OccupancyMapBelief<f64> {
        occ_init(GridGeometry::square(side).unwrap(), 3, (0.01, 0.99)).unwrap()
    }

    #[test]
    fn uniform_prior() {
        let b = map(4);
        for c in 0..16 {
            assert_eq!(b.cell(c), &[1.0 / 3.0; 3]);
            assert!((b.cell(c).iter().sum::<f64>() - 1.0).abs() < 1e-15);
            assert!((shannon_entropy(b.cell(c)) - 3f64.ln()).abs() < 1e-15);
        }
    }

    #[test]
    fn invalid_clamps() {
        let g = GridGeometry::square(3).unwrap();
        assert!(occ_init::<f64>(g, 3, (0.0, 0.99)).is_err());
        assert!(occ_init::<f64>(g, 3, (0.4, 0.99)).is_err());
        assert!(occ_init::<f64>(g, 3, (0.01, 0.3)).is_err());
        assert!(occ_init::<f64>(g, 3, (0.01, 1.0)).is_err());
    }

    #[test]
    fn identity_observation_hits_clamp() {
        let b = map(2);
        let post = occ_fuse(&b, &Measurement::classes(0, vec![(0, 2)]), &ConfusionMatrix::identity(3).unwrap()).unwrap();
        let p = post.cell(0);
        assert!((p[0] - 0.005).abs() < 1e-15 && (p[1] - 0.99).abs() < 1e-15 && (p[2] - 0.005).abs() < 1e-15, "{p:?}");
        assert_eq!(post.cell(1), b.cell(1));
    }

    #[test]
    fn uniform_prior_passes_likelihood_through() {
        let b = map(2);
        let cm = ConfusionMatrix::uniform_noise(3, 0.8).unwrap();
        let post = occ_fuse(&b, &Measurement::classes(0, vec![(3, 1)]), &cm).unwrap();
        let p = post.cell(3);
        for (a, e) in p.iter().zip([0.8, 0.1, 0.1]) {
            assert!((a - e).abs() < 1e-15);
        }
    }

    #[test]
    fn repeated_observations_converge_to_upper_bound() {
        let cm = ConfusionMatrix::uniform_noise(3, 0.8).unwrap();
        let mut b = map(2);
        let mut previous = 0.0;
        for _ in 0..50 {
            b = occ_fuse(&b, &Measurement::classes(0, vec![(0, 3)]), &cm).unwrap();
            assert!(b.cell(0)[2] >= previous - 1e-15);
            previous = b.cell(0)[2];
        }
        assert!(b.cell(0)[2] >= 0.99 - 1e-9);
    }

    #[test]
    fn rejects_bad_observations() {
        let b = map(2);
        let cm = ConfusionMatrix::identity(3).unwrap();
        assert!(occ_fuse(&b, &Measurement::classes(0, vec![(0, 4)]), &cm).is_err());
        assert!(occ_fuse(&b, &Measurement::classes(0, vec![(4, 1)]), &cm).is_err());
        assert!(occ_fuse(&b, &Measurement::values(0, vec![(0, 0.1)]), &cm).is_err());
        assert!(occ_fuse(&b, &Measurement::classes(0, vec![(0, 1)]), &ConfusionMatrix::identity(2).unwrap()).is_err());
    }

    proptest! {
        #[test]
        fn fusion_preserves_normalisation_and_bounds(
            obs in proptest::collection::vec((0usize..4, 1u16..=3), 1..40),
            acc in 0.34f64..1.0,
        ) {
            let cm = ConfusionMatrix::uniform_noise(3, acc).unwrap();
            let mut b = map(2);
            for (cell, class) in obs {
                b = occ_fuse(&b, &Measurement::classes(0, vec![(cell, class)]), &cm).unwrap();
            }
            let floor = b.clamp().floor();
            for c in 0..4 {
                let p = b.cell(c);
                prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                prop_assert!(p.iter().all(|v| *v >= floor - 1e-15 && *v <= 0.99 + 1e-15));
                let h = shannon_entropy(p);
                prop_assert!(h <= 3f64.ln() + 1e-12);
                prop_assert!(h.exp() >= 1.0 && h.exp() <= 3.0 + 1e-12);
            }
        }
    }
}

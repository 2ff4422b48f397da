use super::kernel::MaternKernel;
use crate::error::{IppError, Result};
use crate::grid::GridGeometry;
use crate::linalg::{cholesky_in_place, solve_lower_in_place};
use crate::scalar::Real;
use crate::sensors::{Measurement, Readings};

/// Diagonal jitter added to the prior Gram matrix.
pub const PRIOR_JITTER: f64 = 1e-8;

/// Joint Gaussian over all cell centers, updated by exact conditioning.
///
/// Measurements are snapped to cell centers, so fusing them one batch at a
/// time reproduces batch GP regression on the same data.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianMapBelief<T> {
    geometry: GridGeometry,
    kernel: MaternKernel<T>,
    mean: Vec<T>,
    /// `n x n`, row-major, exactly symmetric.
    cov: Vec<T>,
    noise_variance: T,
}

impl<T: Real> GaussianMapBelief<T> {
    pub fn geometry(&self) -> GridGeometry {
        self.geometry
    }

    pub fn kernel(&self) -> &MaternKernel<T> {
        &self.kernel
    }

    pub fn mean(&self) -> &[T] {
        &self.mean
    }

    pub fn covariance(&self) -> &[T] {
        &self.cov
    }

    pub fn noise_variance(&self) -> T {
        self.noise_variance
    }

    #[inline]
    pub fn variance(&self, cell: usize) -> T {
        self.cov[cell * self.geometry.len() + cell]
    }

    pub fn variances(&self) -> Vec<T> {
        let n = self.geometry.len();
        (0..n).map(|i| self.cov[i * n + i]).collect()
    }

    /// Row `cell` of the covariance, equal to column `cell` by symmetry.
    #[inline]
    pub(crate) fn cov_row(&self, cell: usize) -> &[T] {
        let n = self.geometry.len();
        &self.cov[cell * n..(cell + 1) * n]
    }

    pub fn fuse(&self, m: &Measurement<T>) -> Result<Self> {
        let mut next = self.clone();
        next.fuse_in_place(m)?;
        Ok(next)
    }

    /// Conditions on a batch of point observations with i.i.d. noise.
    pub fn fuse_in_place(&mut self, m: &Measurement<T>) -> Result<()> {
        let obs = match &m.readings {
            Readings::Values(v) => v,
            Readings::Classes(_) => {
                return Err(IppError::config("Gaussian map cannot fuse class observations"))
            }
        };
        if obs.is_empty() {
            return Ok(());
        }
        let n = self.geometry.len();
        if let Some((c, _)) = obs.iter().find(|(c, _)| *c >= n) {
            return Err(IppError::config(format!("measured cell {c} outside grid of {n} cells")));
        }
        let k = obs.len();
        let cells: Vec<usize> = obs.iter().map(|(c, _)| *c).collect();

        // Innovation covariance S = H P H^T + R and its Cholesky factor.
        let mut s = vec![T::zero(); k * k];
        for (a, ca) in cells.iter().enumerate() {
            for (b, cb) in cells.iter().enumerate() {
                s[a * k + b] = self.cov[ca * n + cb];
            }
            s[a * k + a] += self.noise_variance;
        }
        cholesky_in_place(&mut s, k)
            .map_err(|e| IppError::numerical(format!("singular innovation matrix: {e}")))?;

        // W = P H^T L^-T, stored row-major n x k.
        let mut w = vec![T::zero(); n * k];
        for j in 0..k {
            let row = self.cov_row(cells[j]);
            let ljj = s[j * k + j];
            for i in 0..n {
                let mut acc = row[i];
                for q in 0..j {
                    acc -= s[j * k + q] * w[i * k + q];
                }
                w[i * k + j] = acc / ljj;
            }
        }

        let mut innovation: Vec<T> = obs.iter().map(|(c, z)| *z - self.mean[*c]).collect();
        solve_lower_in_place(&s, k, &mut innovation);
        for i in 0..n {
            let wi = &w[i * k..(i + 1) * k];
            self.mean[i] += wi.iter().zip(&innovation).map(|(a, b)| *a * *b).sum::<T>();
        }

        for i in 0..n {
            let wi = &w[i * k..(i + 1) * k];
            for j in i..n {
                let wj = &w[j * k..(j + 1) * k];
                let d: T = wi.iter().zip(wj).map(|(a, b)| *a * *b).sum();
                let v = self.cov[i * n + j] - d;
                self.cov[i * n + j] = v;
                self.cov[j * n + i] = v;
            }
            // rounding can push an exhausted variance just below zero
            if self.cov[i * n + i] < T::zero() {
                self.cov[i * n + i] = T::zero();
            }
        }
        Ok(())
    }
}

/// Prior map: constant mean and the Matérn Gram matrix over cell centers.
pub fn gp_init<T: Real>(
    geometry: GridGeometry,
    kernel: MaternKernel<T>,
    prior_mean: T,
    noise_variance: T,
) -> Result<GaussianMapBelief<T>> {
    if !(noise_variance > T::zero()) {
        return Err(IppError::config(format!("noise variance must be > 0, got {noise_variance}")));
    }
    let n = geometry.len();
    let centers: Vec<[T; 2]> = (0..n)
        .map(|i| {
            let c = geometry.cell_center(i);
            [T::lit(c[0]), T::lit(c[1])]
        })
        .collect();
    let mut cov = vec![T::zero(); n * n];
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval(centers[i], centers[j]);
            cov[i * n + j] = v;
            cov[j * n + i] = v;
        }
        cov[i * n + i] += T::lit(PRIOR_JITTER);
    }
    let mut check = cov.clone();
    cholesky_in_place(&mut check, n)
        .map_err(|e| IppError::numerical(format!("prior covariance not positive definite: {e}")))?;
    Ok(GaussianMapBelief {
        geometry,
        kernel,
        mean: vec![prior_mean; n],
        cov,
        noise_variance,
    })
}

pub fn gp_fuse<T: Real>(belief: &GaussianMapBelief<T>, m: &Measurement<T>) -> Result<GaussianMapBelief<T>> {
    belief.fuse(m)
}

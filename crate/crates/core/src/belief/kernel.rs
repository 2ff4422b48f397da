use serde::{Deserialize, Serialize};

use crate::error::{IppError, Result};
use crate::scalar::Real;

/// Matérn covariance with smoothness 3/2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaternKernel<T> {
    pub lengthscale: T,
    pub signal_variance: T,
}

impl<T: Real> MaternKernel<T> {
    pub fn new(lengthscale: T, signal_variance: T) -> Result<Self> {
        if !(lengthscale > T::zero()) || !(signal_variance > T::zero()) {
            return Err(IppError::config(format!(
                "Matérn kernel needs positive lengthscale and variance, got ({lengthscale}, {signal_variance})"
            )));
        }
        Ok(MaternKernel { lengthscale, signal_variance })
    }

    /// `σ_f² (1 + √3 d / l) exp(−√3 d / l)`.
    #[inline]
    pub fn at_distance(&self, d: T) -> T {
        let r = T::lit(3.0).sqrt() * d / self.lengthscale;
        self.signal_variance * (T::one() + r) * (-r).exp()
    }

    #[inline]
    pub fn eval(&self, a: [T; 2], b: [T; 2]) -> T {
        let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
        self.at_distance((dx * dx + dy * dy).sqrt())
    }
}

pub fn kernel_eval<T: Real>(a: [T; 2], b: [T; 2], kernel: &MaternKernel<T>) -> T {
    kernel.eval(a, b)
}

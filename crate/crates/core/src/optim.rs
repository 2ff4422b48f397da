//! Covariance matrix adaptation evolution strategy with the standard
//! default strategy parameters. Minimises.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{IppError, Result};
use crate::linalg::symmetric_eigen;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct CmaesOptions<T> {
    pub population: usize,
    pub sigma0: T,
    pub max_generations: usize,
    /// Stop once the best value is at or below this.
    pub target: Option<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CmaesResult<T> {
    pub best_x: Vec<T>,
    pub best_f: T,
    pub generations: usize,
    pub evaluations: usize,
}

/// Ask/tell state of one optimisation run.
#[derive(Clone, Debug)]
pub struct Cmaes<T> {
    dim: usize,
    lambda: usize,
    weights: Vec<T>,
    mueff: T,
    cc: T,
    cs: T,
    c1: T,
    cmu: T,
    damps: T,
    chi_n: T,
    mean: Vec<T>,
    sigma: T,
    cov: Vec<T>,
    basis: Vec<T>,
    scales: Vec<T>,
    pc: Vec<T>,
    ps: Vec<T>,
    generation: usize,
}

impl<T: Real> Cmaes<T> {
    pub fn new(x0: Vec<T>, sigma0: T, population: usize) -> Result<Self> {
        let n = x0.len();
        if n == 0 || population < 4 || !(sigma0 > T::zero()) {
            return Err(IppError::config("CMA-ES needs dim >= 1, population >= 4 and sigma0 > 0"));
        }
        let mu = population / 2;
        let raw: Vec<T> = (1..=mu)
            .map(|i| (T::from_count(mu) + T::lit(0.5)).ln() - T::from_count(i).ln())
            .collect();
        let total: T = raw.iter().copied().sum();
        let weights: Vec<T> = raw.iter().map(|w| *w / total).collect();
        let mueff = T::one() / weights.iter().map(|w| *w * *w).sum::<T>();
        let nf = T::from_count(n);
        let two = T::lit(2.0);
        let cc = (T::lit(4.0) + mueff / nf) / (nf + T::lit(4.0) + two * mueff / nf);
        let cs = (mueff + two) / (nf + mueff + T::lit(5.0));
        let c1 = two / ((nf + T::lit(1.3)).powi(2) + mueff);
        let cmu = (T::one() - c1).min(two * (mueff - two + T::one() / mueff) / ((nf + two).powi(2) + mueff));
        let damps = T::one() + two * T::zero().max(((mueff - T::one()) / (nf + T::one())).sqrt() - T::one()) + cs;
        let chi_n = nf.sqrt() * (T::one() - T::one() / (T::lit(4.0) * nf) + T::one() / (T::lit(21.0) * nf * nf));
        let mut eye = vec![T::zero(); n * n];
        (0..n).for_each(|i| eye[i * n + i] = T::one());
        Ok(Cmaes {
            dim: n,
            lambda: population,
            weights,
            mueff,
            cc,
            cs,
            c1,
            cmu,
            damps,
            chi_n,
            mean: x0,
            sigma: sigma0,
            cov: eye.clone(),
            basis: eye,
            scales: vec![T::one(); n],
            pc: vec![T::zero(); n],
            ps: vec![T::zero(); n],
            generation: 0,
        })
    }

    pub fn mean(&self) -> &[T] {
        &self.mean
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    /// Draws `λ` candidates `m + σ B D z`.
    pub fn ask<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Vec<T>> {
        let n = self.dim;
        (0..self.lambda)
            .map(|_| {
                let dz: Vec<T> = self
                    .scales
                    .iter()
                    .map(|d| {
                        let z: f64 = StandardNormal.sample(rng);
                        T::lit(z) * *d
                    })
                    .collect();
                (0..n)
                    .map(|i| {
                        let y: T = (0..n).map(|j| self.basis[i * n + j] * dz[j]).sum();
                        self.mean[i] + self.sigma * y
                    })
                    .collect()
            })
            .collect()
    }

    /// Updates the distribution from candidates and their values.
    pub fn tell(&mut self, candidates: &[Vec<T>], values: &[T]) {
        let n = self.dim;
        let mut order: Vec<usize> = (0..candidates.len()).collect();
        order.sort_by(|a, b| values[*a].partial_cmp(&values[*b]).unwrap_or(std::cmp::Ordering::Equal));
        let mu = self.weights.len();
        let old = self.mean.clone();
        let steps: Vec<Vec<T>> = order[..mu]
            .iter()
            .map(|&k| (0..n).map(|i| (candidates[k][i] - old[i]) / self.sigma).collect())
            .collect();
        let mut yw = vec![T::zero(); n];
        for (w, y) in self.weights.iter().zip(&steps) {
            for i in 0..n {
                yw[i] += *w * y[i];
            }
        }
        for i in 0..n {
            self.mean[i] = old[i] + self.sigma * yw[i];
        }
        // C^{-1/2} yw = B D^{-1} Bᵀ yw
        let bt: Vec<T> = (0..n)
            .map(|j| (0..n).map(|i| self.basis[i * n + j] * yw[i]).sum::<T>() / self.scales[j])
            .collect();
        let inv_sqrt: Vec<T> = (0..n).map(|i| (0..n).map(|j| self.basis[i * n + j] * bt[j]).sum()).collect();
        let two = T::lit(2.0);
        let cs_norm = (self.cs * (two - self.cs) * self.mueff).sqrt();
        for i in 0..n {
            self.ps[i] = (T::one() - self.cs) * self.ps[i] + cs_norm * inv_sqrt[i];
        }
        let ps_norm = self.ps.iter().map(|v| *v * *v).sum::<T>().sqrt();
        let g = self.generation as i32 + 1;
        let hsig = ps_norm / (T::one() - (T::one() - self.cs).powi(2 * g)).sqrt() / self.chi_n
            < T::lit(1.4) + two / T::from_count(n + 1);
        let cc_norm = (self.cc * (two - self.cc) * self.mueff).sqrt();
        let h = if hsig { T::one() } else { T::zero() };
        for i in 0..n {
            self.pc[i] = (T::one() - self.cc) * self.pc[i] + h * cc_norm * yw[i];
        }
        let delta = (T::one() - h) * self.cc * (two - self.cc);
        for i in 0..n {
            for j in 0..=i {
                let rank_mu: T = self.weights.iter().zip(&steps).map(|(w, y)| *w * y[i] * y[j]).sum();
                let v = (T::one() - self.c1 - self.cmu) * self.cov[i * n + j]
                    + self.c1 * (self.pc[i] * self.pc[j] + delta * self.cov[i * n + j])
                    + self.cmu * rank_mu;
                self.cov[i * n + j] = v;
                self.cov[j * n + i] = v;
            }
        }
        self.sigma *= ((self.cs / self.damps) * (ps_norm / self.chi_n - T::one())).exp();
        let (vals, vecs) = symmetric_eigen(&self.cov, n);
        let floor = T::epsilon();
        self.scales = vals.iter().map(|v| v.max(floor).sqrt()).collect();
        self.basis = vecs;
        self.generation += 1;
    }
}

/// Runs ask/tell for `max_generations`, tracking the best point ever evaluated.
///
/// The start point itself is evaluated first, so zero generations returns `x0`.
pub fn cmaes_minimize<T, F, R>(mut f: F, x0: Vec<T>, options: &CmaesOptions<T>, rng: &mut R) -> Result<CmaesResult<T>>
where
    T: Real,
    F: FnMut(&[T]) -> Result<T>,
    R: Rng + ?Sized,
{
    let mut es = Cmaes::new(x0.clone(), options.sigma0, options.population)?;
    let mut best_f = f(&x0)?;
    let mut best_x = x0;
    let mut evaluations = 1;
    let reached = |v: T| options.target.is_some_and(|t| v <= t);
    while es.generation() < options.max_generations && !reached(best_f) {
        let pop = es.ask(rng);
        let mut values = Vec::with_capacity(pop.len());
        for x in &pop {
            let v = f(x)?;
            evaluations += 1;
            if v < best_f {
                best_f = v;
                best_x = x.clone();
            }
            values.push(v);
        }
        es.tell(&pop, &values);
        if !es.sigma().is_finite() {
            return Err(IppError::numerical("CMA-ES step size diverged"));
        }
    }
    Ok(CmaesResult { best_x, best_f, generations: es.generation(), evaluations })
}

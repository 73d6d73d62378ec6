//! Particle filters: the possibility particle filter and a bootstrap
//! (SIR) particle filter baseline.
//!
//! Both are generic over the transition and likelihood models. Likelihoods
//! are supplied in log form; only differences between particles matter, so
//! a Gaussian possibility and the matching Gaussian density give the same
//! filter behaviour up to the normalisation convention.

mod possibility;
mod standard;

pub use possibility::{poss_pf_init, poss_pf_step, PossibilityParticleFilter};
pub use standard::{standard_pf_init, standard_pf_step, StandardParticleFilter};

use nalgebra::{SMatrix, SVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::possibility::GaussianPossibility;
use crate::water::{water_pour_continuous, WaterPouredDensity};

/// Transition described by a Gaussian possibility with state-dependent mean
/// and fixed spread.
pub trait PossibilisticTransition<const D: usize> {
    fn predicted_mean(&self, prev: &SVector<f64, D>) -> SVector<f64, D>;

    /// Water-poured zero-mean transition noise.
    fn poured_noise(&self) -> Result<&WaterPouredDensity<D>>;

    fn possibility(&self, prev: &SVector<f64, D>) -> Result<GaussianPossibility<D>> {
        Ok(self
            .poured_noise()?
            .source()
            .with_mean(self.predicted_mean(prev)))
    }
}

/// Probabilistic transition for the standard filter.
pub trait TransitionSampler<const D: usize> {
    fn sample<R: Rng + ?Sized>(&self, prev: &SVector<f64, D>, rng: &mut R) -> SVector<f64, D>;
}

/// Log-likelihood of a measurement. Any additive constant is allowed.
/// `f64::NEG_INFINITY` means the state cannot have produced the measurement.
pub trait Likelihood<const D: usize, Z: ?Sized> {
    fn ln_likelihood(&self, x: &SVector<f64, D>, z: &Z) -> f64;
}

/// `x_k = F x_{k-1} - u + v`, with `v` Gaussian of spread (covariance) `Q`.
#[derive(Debug, Clone)]
pub struct LinearGaussianTransition<const D: usize> {
    matrix: SMatrix<f64, D, D>,
    input: SVector<f64, D>,
    noise: GaussianPossibility<D>,
    // the standard filter does not need the poured form, so a too
    // concentrated Q only fails the possibility filter
    poured: std::result::Result<WaterPouredDensity<D>, Error>,
}

impl<const D: usize> LinearGaussianTransition<D> {
    pub fn new(matrix: SMatrix<f64, D, D>, spread: SMatrix<f64, D, D>) -> Result<Self> {
        let noise = GaussianPossibility::new(SVector::zeros(), spread)?;
        let poured = water_pour_continuous(&noise);
        Ok(Self {
            matrix,
            input: SVector::zeros(),
            noise,
            poured,
        })
    }

    /// Same model with a different deterministic input `u` (subtracted).
    pub fn with_input(&self, input: SVector<f64, D>) -> Self {
        Self {
            input,
            ..self.clone()
        }
    }

    pub fn matrix(&self) -> &SMatrix<f64, D, D> {
        &self.matrix
    }

    pub fn input(&self) -> &SVector<f64, D> {
        &self.input
    }

    pub fn noise(&self) -> &GaussianPossibility<D> {
        &self.noise
    }
}

impl<const D: usize> PossibilisticTransition<D> for LinearGaussianTransition<D> {
    fn predicted_mean(&self, prev: &SVector<f64, D>) -> SVector<f64, D> {
        self.matrix * prev - self.input
    }

    fn poured_noise(&self) -> Result<&WaterPouredDensity<D>> {
        self.poured.as_ref().map_err(Clone::clone)
    }
}

impl<const D: usize> TransitionSampler<D> for LinearGaussianTransition<D> {
    fn sample<R: Rng + ?Sized>(&self, prev: &SVector<f64, D>, rng: &mut R) -> SVector<f64, D> {
        let white = SVector::<f64, D>::from_fn(|_, _| rng.sample(StandardNormal));
        self.predicted_mean(prev) + self.noise.cholesky_factor() * white
    }
}

/// Scalar measurement `z = h' x + w` with Gaussian `w` of variance `variance`.
#[derive(Debug, Clone)]
pub struct LinearGaussianLikelihood<const D: usize> {
    pub observation: SVector<f64, D>,
    pub variance: f64,
}

impl<const D: usize> Likelihood<D, f64> for LinearGaussianLikelihood<D> {
    fn ln_likelihood(&self, x: &SVector<f64, D>, z: &f64) -> f64 {
        let r = z - self.observation.dot(x);
        -0.5 * r * r / self.variance
    }
}

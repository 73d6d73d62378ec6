use nalgebra::SVector;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{Likelihood, TransitionSampler};
use crate::error::{Error, Result};
use crate::particles::{FilterStepRecord, ParticleSet};
use crate::possibility::GaussianPossibility;

/// Draws `n` equally weighted particles from the Gaussian density whose
/// mean and covariance are those of `prior`.
pub fn standard_pf_init<const D: usize, R: Rng + ?Sized>(
    prior: &GaussianPossibility<D>,
    n: usize,
    rng: &mut R,
) -> Result<ParticleSet<D>> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "particle count must be positive".into(),
        ));
    }
    let states = (0..n)
        .map(|_| {
            let white = SVector::<f64, D>::from_fn(|_, _| rng.sample(StandardNormal));
            prior.mean() + prior.cholesky_factor() * white
        })
        .collect();
    Ok(ParticleSet::from_parts(states, vec![1.0 / n as f64; n]))
}

/// One SIR scan: propagate, weight by the likelihood, normalise to unit sum,
/// take the weighted mean, then resample systematically.
///
/// The returned set carries the post-update weights (summing to one) on the
/// resampled states, i.e. `1/n` each.
pub fn standard_pf_step<const D: usize, Z, T, L, R>(
    ps: &ParticleSet<D>,
    scan: usize,
    transition: &T,
    likelihood: &L,
    z: &Z,
    rng: &mut R,
) -> Result<(ParticleSet<D>, FilterStepRecord<D>)>
where
    Z: ?Sized,
    T: TransitionSampler<D>,
    L: Likelihood<D, Z>,
    R: Rng + ?Sized,
{
    let n = ps.len();
    let mut predicted = Vec::with_capacity(n);
    let mut ln_w = Vec::with_capacity(n);
    for (x, w) in ps.states().iter().zip(ps.weights()) {
        let x_pred = transition.sample(x, rng);
        ln_w.push(w.ln() + likelihood.ln_likelihood(&x_pred, z));
        predicted.push(x_pred);
    }
    let peak = ln_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !peak.is_finite() {
        return Err(Error::AllWeightsZero { scan });
    }
    let mut weights: Vec<f64> = ln_w.iter().map(|l| (l - peak).exp()).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    let updated = ParticleSet::from_parts(predicted, weights);
    let record = FilterStepRecord {
        scan,
        estimate: updated.weighted_mean(),
        ln_peak_weight: updated.max_weight().ln(),
    };

    let picks = systematic_resample(updated.weights(), rng);
    let states = picks.iter().map(|&i| updated.states()[i]).collect();
    Ok((
        ParticleSet::from_parts(states, vec![1.0 / n as f64; n]),
        record,
    ))
}

/// Systematic resampling: one uniform offset, `n` evenly spaced pointers.
pub fn systematic_resample<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Vec<usize> {
    let n = weights.len();
    let step = 1.0 / n as f64;
    let start = rng.random::<f64>() * step;
    let mut picks = Vec::with_capacity(n);
    let mut cumulative = weights[0];
    let mut i = 0;
    for m in 0..n {
        let pointer = start + m as f64 * step;
        while pointer > cumulative && i + 1 < n {
            i += 1;
            cumulative += weights[i];
        }
        picks.push(i);
    }
    picks
}

/// Bootstrap particle filter holding its particle set between scans.
#[derive(Debug, Clone)]
pub struct StandardParticleFilter<const D: usize> {
    particles: ParticleSet<D>,
    scan: usize,
}

impl<const D: usize> StandardParticleFilter<D> {
    pub fn new<R: Rng + ?Sized>(
        prior: &GaussianPossibility<D>,
        n: usize,
        rng: &mut R,
    ) -> Result<Self> {
        Ok(Self {
            particles: standard_pf_init(prior, n, rng)?,
            scan: 1,
        })
    }

    pub fn particles(&self) -> &ParticleSet<D> {
        &self.particles
    }

    pub fn scan(&self) -> usize {
        self.scan
    }

    pub fn estimate(&self) -> SVector<f64, D> {
        self.particles.weighted_mean()
    }

    pub fn step<Z, T, L, R>(
        &mut self,
        transition: &T,
        likelihood: &L,
        z: &Z,
        rng: &mut R,
    ) -> Result<FilterStepRecord<D>>
    where
        Z: ?Sized,
        T: TransitionSampler<D>,
        L: Likelihood<D, Z>,
        R: Rng + ?Sized,
    {
        let scan = self.scan + 1;
        let (particles, record) =
            standard_pf_step(&self.particles, scan, transition, likelihood, z, rng)?;
        self.particles = particles;
        self.scan = scan;
        Ok(record)
    }
}

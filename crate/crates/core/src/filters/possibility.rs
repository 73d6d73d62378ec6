use nalgebra::SVector;
use rand::Rng;

use super::{Likelihood, PossibilisticTransition};
use crate::error::{Error, Result};
use crate::particles::{argmax, FilterStepRecord, ParticleSet};
use crate::possibility::GaussianPossibility;
use crate::water::{pour_unchecked, water_pour_continuous};

/// Draws `n` particles from the water-poured prior and weights them by the
/// prior possibility, normalised to a unit maximum.
pub fn poss_pf_init<const D: usize, R: Rng + ?Sized>(
    prior: &GaussianPossibility<D>,
    n: usize,
    rng: &mut R,
) -> Result<ParticleSet<D>> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "particle count must be positive".into(),
        ));
    }
    let poured = water_pour_continuous(prior)?;
    let mut states = Vec::with_capacity(n);
    let mut ln_w = Vec::with_capacity(n);
    for _ in 0..n {
        let (offset, radius_sq) = poured.sample_offset_with_radius(rng);
        states.push(prior.mean() + offset);
        ln_w.push(-0.5 * radius_sq);
    }
    let peak = ln_w[argmax(&ln_w)];
    let weights = ln_w.iter().map(|l| (l - peak).exp()).collect();
    Ok(ParticleSet::from_parts(states, weights))
}

/// One scan of the possibility particle filter.
///
/// Each particle moves to a draw from its water-poured transition and is
/// weighted by the transition possibility at the draw and by the measurement
/// likelihood. The best particle is the MAP estimate. Particles are then
/// resampled from the water-poured weights and keep their (normalised)
/// possibility weights.
pub fn poss_pf_step<const D: usize, Z, T, L, R>(
    ps: &ParticleSet<D>,
    scan: usize,
    transition: &T,
    likelihood: &L,
    z: &Z,
    rng: &mut R,
) -> Result<(ParticleSet<D>, FilterStepRecord<D>)>
where
    Z: ?Sized,
    T: PossibilisticTransition<D>,
    L: Likelihood<D, Z>,
    R: Rng + ?Sized,
{
    let noise = transition.poured_noise()?;
    let n = ps.len();

    let mut predicted = Vec::with_capacity(n);
    let mut ln_w = Vec::with_capacity(n);
    for (x, w) in ps.states().iter().zip(ps.weights()) {
        let (offset, radius_sq) = noise.sample_offset_with_radius(rng);
        let x_pred = transition.predicted_mean(x) + offset;
        // prior weight times transition possibility at the draw
        let ln_prior = w.ln() - 0.5 * radius_sq;
        ln_w.push(ln_prior + likelihood.ln_likelihood(&x_pred, z));
        predicted.push(x_pred);
    }

    let best = argmax(&ln_w);
    let ln_peak = ln_w[best];
    if !ln_peak.is_finite() {
        return Err(Error::AllWeightsZero { scan });
    }
    let record = FilterStepRecord {
        scan,
        estimate: predicted[best],
        ln_peak_weight: ln_peak,
    };

    let normalised: Vec<f64> = ln_w.iter().map(|l| (l - ln_peak).exp()).collect();
    let pour = pour_unchecked(&normalised);
    let picks = pour.sample(rng, n);
    let states: Vec<_> = picks.iter().map(|&a| predicted[a]).collect();
    let mut weights: Vec<f64> = picks.iter().map(|&a| normalised[a]).collect();
    let max = weights.iter().copied().fold(0.0, f64::max);
    for w in &mut weights {
        *w /= max;
    }
    Ok((ParticleSet::from_parts(states, weights), record))
}

/// Possibility particle filter holding its particle set between scans.
#[derive(Debug, Clone)]
pub struct PossibilityParticleFilter<const D: usize> {
    particles: ParticleSet<D>,
    scan: usize,
}

impl<const D: usize> PossibilityParticleFilter<D> {
    pub fn new<R: Rng + ?Sized>(
        prior: &GaussianPossibility<D>,
        n: usize,
        rng: &mut R,
    ) -> Result<Self> {
        Ok(Self {
            particles: poss_pf_init(prior, n, rng)?,
            scan: 1,
        })
    }

    pub fn particles(&self) -> &ParticleSet<D> {
        &self.particles
    }

    pub fn scan(&self) -> usize {
        self.scan
    }

    /// Best particle of the current set.
    pub fn estimate(&self) -> SVector<f64, D> {
        self.particles.states()[self.particles.argmax()]
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
        T: PossibilisticTransition<D>,
        L: Likelihood<D, Z>,
        R: Rng + ?Sized,
    {
        let scan = self.scan + 1;
        let (particles, record) =
            poss_pf_step(&self.particles, scan, transition, likelihood, z, rng)?;
        self.particles = particles;
        self.scan = scan;
        Ok(record)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::{LinearGaussianLikelihood, LinearGaussianTransition};
    use nalgebra::{Matrix1, Matrix2, Vector1, Vector2};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    struct Flat;
    impl<const D: usize> Likelihood<D, f64> for Flat {
        fn ln_likelihood(&self, _: &SVector<f64, D>, _: &f64) -> f64 {
            0.0
        }
    }

    struct Nowhere;
    impl Likelihood<1, f64> for Nowhere {
        fn ln_likelihood(&self, _: &Vector1<f64>, _: &f64) -> f64 {
            f64::NEG_INFINITY
        }
    }

    fn toy() -> (GaussianPossibility<1>, LinearGaussianTransition<1>) {
        let prior = GaussianPossibility::new(Vector1::new(0.0), Matrix1::new(4.0)).unwrap();
        let tr = LinearGaussianTransition::new(Matrix1::new(1.0), Matrix1::new(1.0)).unwrap();
        (prior, tr)
    }

    #[test]
    fn single_particle_init_has_unit_weight() {
        let (prior, _) = toy();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ps = poss_pf_init(&prior, 1, &mut rng).unwrap();
        assert_eq!(ps.weights(), &[1.0]);
    }

    #[test]
    fn init_weights_are_max_normalised() {
        let (prior, _) = toy();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ps = poss_pf_init(&prior, 1000, &mut rng).unwrap();
        assert_eq!(ps.max_weight(), 1.0);
        assert!(ps.weights().iter().all(|w| *w > 0.0 && *w <= 1.0));
    }

    #[test]
    fn init_propagates_too_concentrated() {
        let prior = GaussianPossibility::new(Vector1::new(0.0), Matrix1::new(1e-3)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!(matches!(
            poss_pf_init(&prior, 10, &mut rng),
            Err(Error::TooConcentrated { .. })
        ));
    }

    #[test]
    fn one_particle_keeps_unit_weight_and_is_the_map() {
        let (prior, tr) = toy();
        let lik = LinearGaussianLikelihood {
            observation: Vector1::new(1.0),
            variance: 1.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut pf = PossibilityParticleFilter::new(&prior, 1, &mut rng).unwrap();
        for k in 0..5 {
            let rec = pf.step(&tr, &lik, &(k as f64), &mut rng).unwrap();
            assert_eq!(pf.particles().weights(), &[1.0]);
            assert_eq!(rec.estimate, pf.particles().states()[0]);
        }
    }

    #[test]
    fn single_particle_follows_deterministic_propagation() {
        // The smallest admissible spread has unit total mass; the MAP is the
        // propagated particle plus exactly one noise draw.
        let f = Matrix2::new(1.0, 40.0, 0.0, 1.0);
        let u = Vector2::new(0.5, -0.25);
        let s = 1.0 / (2.0 * std::f64::consts::PI);
        let tr = LinearGaussianTransition::new(f, Matrix2::from_diagonal(&Vector2::new(s, s)))
            .unwrap()
            .with_input(u);
        let noise = tr.poured_noise().unwrap().clone();
        assert_eq!(noise.level(), 1.0);
        let prior = GaussianPossibility::new(Vector2::new(3.0, 1.0), Matrix2::identity()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ps = poss_pf_init(&prior, 1, &mut rng).unwrap();
        let start = ps.states()[0];
        let mut shadow = rng.clone();
        let (_, rec) = poss_pf_step(&ps, 2, &tr, &Flat, &0.0, &mut rng).unwrap();
        let expected = f * start - u + noise.sample_offset(&mut shadow);
        assert!((rec.estimate - expected).norm() < 1e-12);

        let mut bias = Vector2::zeros();
        let runs = 4000;
        for _ in 0..runs {
            let (_, rec) = poss_pf_step(&ps, 2, &tr, &Flat, &0.0, &mut rng).unwrap();
            bias += (rec.estimate - (f * start - u)) / runs as f64;
        }
        let se = (s / runs as f64).sqrt();
        assert!(bias.abs().max() < 4.0 * se, "bias {bias}");
    }

    #[test]
    fn collapse_is_reported() {
        let (prior, tr) = toy();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ps = poss_pf_init(&prior, 20, &mut rng).unwrap();
        assert_eq!(
            poss_pf_step(&ps, 2, &tr, &Nowhere, &0.0, &mut rng).unwrap_err(),
            Error::AllWeightsZero { scan: 2 }
        );
    }

    #[test]
    fn step_invariants() {
        let (prior, tr) = toy();
        let lik = LinearGaussianLikelihood {
            observation: Vector1::new(1.0),
            variance: 0.5,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut ps = poss_pf_init(&prior, 500, &mut rng).unwrap();
        for k in 2..12 {
            let z = 0.3 * k as f64;
            let before = ps.len();
            let (next, rec) = poss_pf_step(&ps, k, &tr, &lik, &z, &mut rng).unwrap();
            assert_eq!(next.len(), before);
            assert_eq!(next.max_weight(), 1.0);
            assert!(next.weights().iter().all(|w| *w > 0.0 && *w <= 1.0));
            assert!(rec.ln_peak_weight <= 0.0);
            // MAP and resampled particles all come from the predicted set,
            // which resampling keeps a subset of
            assert!(rec.estimate[0].is_finite());
            ps = next;
        }
    }
}

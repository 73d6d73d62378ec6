use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Zero-mean measurement noise generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    Gaussian {
        sigma: f64,
    },
    /// Student-t with scale `sigma` and `nu` degrees of freedom; an infinite
    /// `nu` is exactly the Gaussian.
    StudentT {
        sigma: f64,
        nu: f64,
    },
}

impl NoiseModel {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        let m = Self::Gaussian { sigma };
        m.validate()?;
        Ok(m)
    }

    pub fn student_t(sigma: f64, nu: f64) -> Result<Self> {
        let m = Self::StudentT { sigma, nu };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let (sigma, nu) = match *self {
            Self::Gaussian { sigma } => (sigma, f64::INFINITY),
            Self::StudentT { sigma, nu } => (sigma, nu),
        };
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise scale must be non-negative, got {sigma}"
            )));
        }
        if nu.is_nan() || nu <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "degrees of freedom must be positive, got {nu}"
            )));
        }
        Ok(())
    }

    pub fn sigma(&self) -> f64 {
        match *self {
            Self::Gaussian { sigma } | Self::StudentT { sigma, .. } => sigma,
        }
    }

    /// Degrees of freedom, infinite for the Gaussian.
    pub fn nu(&self) -> f64 {
        match *self {
            Self::Gaussian { .. } => f64::INFINITY,
            Self::StudentT { nu, .. } => nu,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Gaussian { sigma } => sigma * rng.sample::<f64, _>(StandardNormal),
            Self::StudentT { sigma, nu } if nu.is_infinite() => {
                sigma * rng.sample::<f64, _>(StandardNormal)
            }
            Self::StudentT { sigma, nu } => {
                let g: f64 = rng.sample(StandardNormal);
                let chi = ChiSquared::new(nu)
                    .expect("validated degrees of freedom")
                    .sample(rng);
                sigma * g / (chi / nu).sqrt()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn moments(m: NoiseModel, seed: u64, n: usize) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs: Vec<f64> = (0..n).map(|_| m.sample(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (mean, var.sqrt())
    }

    #[test]
    fn gaussian_sample_std() {
        let sigma = 1f64.to_radians();
        let (_, sd) = moments(NoiseModel::gaussian(sigma).unwrap(), 1, 100_000);
        assert!((sd - sigma).abs() < 0.02f64.to_radians());
    }

    #[test]
    fn infinite_nu_is_gaussian() {
        let sigma = 1f64.to_radians();
        let g = NoiseModel::gaussian(sigma).unwrap();
        let t = NoiseModel::student_t(sigma, f64::INFINITY).unwrap();
        let (mg, sg) = moments(g, 7, 100_000);
        let (mt, st) = moments(t, 7, 100_000);
        // same seed policy, same draws
        assert_eq!((mg, sg), (mt, st));
        assert!((sg / sigma - 1.0).abs() < 0.01 && (st / sigma - 1.0).abs() < 0.01);
        assert!(mg.abs() < 0.01 * sigma * 4.0);
    }

    #[test]
    fn student_t_variance() {
        // Var = sigma^2 nu / (nu - 2)
        let (_, sd) = moments(NoiseModel::student_t(1.0, 8.0).unwrap(), 3, 200_000);
        assert!((sd * sd - 8.0 / 6.0).abs() < 0.03);
    }

    #[test]
    fn zero_scale_is_noise_free() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = NoiseModel::student_t(0.0, 3.0).unwrap();
        assert!((0..100).all(|_| m.sample(&mut rng) == 0.0));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(NoiseModel::gaussian(-1.0).is_err());
        assert!(NoiseModel::student_t(1.0, 0.0).is_err());
    }
}

//! Gaussian possibility functions.
//!
//! A possibility function assigns every state a degree of possibility in
//! `[0, 1]` with supremum one. The Gaussian family is the unnormalised
//! Gaussian shape `exp(-0.5 (x - mean)' P^-1 (x - mean))`, whose peak value
//! is exactly one at the mean.

use nalgebra::{Cholesky, SMatrix, SVector};

use crate::error::{Error, Result};

/// Gaussian possibility function with a mean and a symmetric positive-definite spread.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPossibility<const D: usize> {
    mean: SVector<f64, D>,
    spread: SMatrix<f64, D, D>,
    // lower Cholesky factor of the spread
    chol: SMatrix<f64, D, D>,
    log_det: f64,
}

impl<const D: usize> GaussianPossibility<D> {
    pub fn new(mean: SVector<f64, D>, spread: SMatrix<f64, D, D>) -> Result<Self> {
        if mean.iter().chain(spread.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite mean or spread".into()));
        }
        let asym = (spread - spread.transpose()).abs().max();
        if asym > 1e-9 * spread.abs().max().max(f64::MIN_POSITIVE) {
            return Err(Error::NotPositiveDefinite);
        }
        let chol = Cholesky::new(spread)
            .ok_or(Error::NotPositiveDefinite)?
            .unpack();
        let log_det = 2.0 * chol.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        if !log_det.is_finite() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(Self {
            mean,
            spread,
            chol,
            log_det,
        })
    }

    /// Builds from row-major slices, checking the dimension.
    pub fn from_slices(mean: &[f64], spread: &[f64]) -> Result<Self> {
        if mean.len() != D {
            return Err(Error::DimensionMismatch {
                expected: D,
                got: mean.len(),
            });
        }
        if spread.len() != D * D {
            return Err(Error::DimensionMismatch {
                expected: D * D,
                got: spread.len(),
            });
        }
        Self::new(
            SVector::from_column_slice(mean),
            SMatrix::from_row_slice(spread),
        )
    }

    pub fn mean(&self) -> &SVector<f64, D> {
        &self.mean
    }

    pub fn spread(&self) -> &SMatrix<f64, D, D> {
        &self.spread
    }

    /// Lower-triangular `L` with `L L' = spread`.
    pub fn cholesky_factor(&self) -> &SMatrix<f64, D, D> {
        &self.chol
    }

    /// Natural log of the spread determinant.
    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    /// Same spread, different mean. Skips the factorisation.
    pub fn with_mean(&self, mean: SVector<f64, D>) -> Self {
        Self {
            mean,
            spread: self.spread,
            chol: self.chol,
            log_det: self.log_det,
        }
    }

    /// Squared Mahalanobis distance of `x` from the mean.
    pub fn mahalanobis_sq(&self, x: &SVector<f64, D>) -> f64 {
        let white = self
            .chol
            .solve_lower_triangular(&(x - self.mean))
            .expect("Cholesky factor has a positive diagonal");
        white.norm_squared()
    }

    pub fn ln_eval(&self, x: &SVector<f64, D>) -> f64 {
        -0.5 * self.mahalanobis_sq(x)
    }

    /// Possibility of the state `x`, in `(0, 1]`.
    pub fn eval(&self, x: &SVector<f64, D>) -> f64 {
        self.ln_eval(x).exp()
    }

    pub fn eval_slice(&self, x: &[f64]) -> Result<f64> {
        if x.len() != D {
            return Err(Error::DimensionMismatch {
                expected: D,
                got: x.len(),
            });
        }
        Ok(self.eval(&SVector::from_column_slice(x)))
    }

    /// Integral of the possibility function over the whole space,
    /// `(2 pi)^(d/2) det(P)^(1/2)`.
    pub fn total_mass(&self) -> f64 {
        (0.5 * D as f64 * (2.0 * std::f64::consts::PI).ln() + 0.5 * self.log_det).exp()
    }
}

/// Turns a vector of non-negative density values into possibility values by
/// dividing through the maximum.
pub fn normalize_density_to_possibility(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some((index, &value)) = values
        .iter()
        .enumerate()
        .find(|(_, v)| !v.is_finite() || **v < 0.0)
    {
        return Err(Error::InvalidParameter(format!(
            "value {value} at index {index} is not a finite non-negative number"
        )));
    }
    let max = values.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return Err(Error::AllZero);
    }
    Ok(values.iter().map(|v| v / max).collect())
}

//! Water pouring: the least informative probability law dominated by a
//! possibility function.
//!
//! Water is poured under the graph of the possibility function until the
//! volume reaches one. The resulting density is `min(pi(x), level)`: flat on
//! the plateau where `pi` exceeds the level, and equal to `pi` elsewhere. The
//! same construction applies to a finite set of possibility weights, where
//! the level is found exactly by sorting.

use nalgebra::SVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::possibility::GaussianPossibility;
use crate::special::{chi2_inverse_ln_survival, chi2_ln_survival, unit_ball_volume};

const MASS_TOL: f64 = 1e-12;

/// Density `min(pi(x), level)` obtained by water pouring a Gaussian possibility.
#[derive(Debug, Clone, PartialEq)]
pub struct WaterPouredDensity<const D: usize> {
    source: GaussianPossibility<D>,
    level: f64,
    plateau_radius: f64,
    plateau_mass: f64,
}

impl<const D: usize> WaterPouredDensity<D> {
    pub fn source(&self) -> &GaussianPossibility<D> {
        &self.source
    }

    /// The water level `lambda`, in `(0, 1]`.
    pub fn level(&self) -> f64 {
        self.level
    }

    /// Mahalanobis radius of the plateau, `sqrt(-2 ln level)`.
    pub fn plateau_radius(&self) -> f64 {
        self.plateau_radius
    }

    /// Probability that a draw lands on the plateau.
    pub fn plateau_mass(&self) -> f64 {
        self.plateau_mass
    }

    pub fn density(&self, x: &SVector<f64, D>) -> f64 {
        self.source.eval(x).min(self.level)
    }

    /// Moves the density to a new mean without re-solving for the level.
    pub fn recentred(&self, mean: SVector<f64, D>) -> Self {
        Self {
            source: self.source.with_mean(mean),
            ..self.clone()
        }
    }

    /// Draws one state.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SVector<f64, D> {
        self.source.mean() + self.sample_offset(rng)
    }

    /// Draws a deviation from the mean.
    ///
    /// Composition: the plateau is a uniform ellipsoid, the remainder has the
    /// Gaussian shape restricted to squared Mahalanobis radius above `r^2`.
    pub fn sample_offset<R: Rng + ?Sized>(&self, rng: &mut R) -> SVector<f64, D> {
        self.sample_offset_with_radius(rng).0
    }

    /// Like [`Self::sample_offset`], also returning the squared Mahalanobis
    /// radius of the draw, so `ln pi = -radius_sq / 2` comes for free.
    pub fn sample_offset_with_radius<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
    ) -> (SVector<f64, D>, f64) {
        let dir = unit_direction::<D, R>(rng);
        let r = self.plateau_radius;
        let radius = if rng.random::<f64>() < self.plateau_mass {
            r * rng.random::<f64>().powf(1.0 / D as f64)
        } else {
            let u: f64 = rng.random();
            let target = chi2_ln_survival(D, r * r) + (1.0 - u).ln();
            chi2_inverse_ln_survival(D, target, r * r).sqrt()
        };
        (
            self.source.cholesky_factor() * (dir * radius),
            radius * radius,
        )
    }
}

fn unit_direction<const D: usize, R: Rng + ?Sized>(rng: &mut R) -> SVector<f64, D> {
    loop {
        let v = SVector::<f64, D>::from_fn(|_, _| rng.sample(StandardNormal));
        let n = v.norm();
        if n > 1e-300 {
            return v / n;
        }
    }
}

/// Integral of `min(pi, exp(-r^2/2))`, in logs.
fn ln_poured_mass(d: usize, ln_sqrt_det: f64, r: f64) -> f64 {
    let ln_tail = 0.5 * d as f64 * (2.0 * std::f64::consts::PI).ln() + chi2_ln_survival(d, r * r);
    if r == 0.0 {
        return ln_sqrt_det + ln_tail;
    }
    let ln_plateau = -0.5 * r * r + unit_ball_volume(d).ln() + d as f64 * r.ln();
    let m = ln_plateau.max(ln_tail);
    ln_sqrt_det + m + ((ln_plateau - m).exp() + (ln_tail - m).exp()).ln()
}

/// Finds the water level at which `min(pi, level)` integrates to one.
///
/// The poured mass decreases strictly with the plateau radius, so the level
/// is found by bisection on the radius.
pub fn water_pour_continuous<const D: usize>(
    source: &GaussianPossibility<D>,
) -> Result<WaterPouredDensity<D>> {
    let ln_sqrt_det = 0.5 * source.log_det();
    let mass_at = |r: f64| ln_poured_mass(D, ln_sqrt_det, r);

    let total = mass_at(0.0).exp();
    if total < 1.0 - MASS_TOL {
        return Err(Error::TooConcentrated { mass: total });
    }
    if total <= 1.0 + MASS_TOL {
        return Ok(WaterPouredDensity {
            source: source.clone(),
            level: 1.0,
            plateau_radius: 0.0,
            plateau_mass: 0.0,
        });
    }

    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut m_lo = total.ln();
    let mut m_hi = mass_at(hi);
    while m_hi > 0.0 {
        lo = hi;
        m_lo = m_hi;
        hi *= 2.0;
        m_hi = mass_at(hi);
    }
    let mut r = 0.5 * (lo + hi);
    for _ in 0..200 {
        r = 0.5 * (lo + hi);
        let m = mass_at(r);
        debug_assert!(
            m <= m_lo + 1e-13 && m >= m_hi - 1e-13,
            "poured mass must be monotone in the level"
        );
        // |ln M| <= tol implies |M - 1| <= ~tol
        if m.abs() <= MASS_TOL || hi - lo <= f64::EPSILON * hi {
            break;
        }
        if m > 0.0 {
            lo = r;
            m_lo = m;
        } else {
            hi = r;
            m_hi = m;
        }
    }

    let level = (-0.5 * r * r).exp();
    let plateau_mass =
        (ln_sqrt_det - 0.5 * r * r + unit_ball_volume(D).ln() + D as f64 * r.ln()).exp();
    Ok(WaterPouredDensity {
        source: source.clone(),
        level,
        plateau_radius: r,
        plateau_mass: plateau_mass.min(1.0),
    })
}

/// Water pouring of a finite set of possibility weights.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteWaterPour {
    input_weights: Vec<f64>,
    level: f64,
    pmf: Vec<f64>,
}

impl DiscreteWaterPour {
    pub fn input_weights(&self) -> &[f64] {
        &self.input_weights
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// `count` independent categorical draws by inverse CDF.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<usize> {
        sample_discrete(&self.pmf, rng, count)
    }
}

/// Validates and pours a weight vector with entries in `(0, 1]` and maximum one.
pub fn water_pour_discrete(weights: &[f64]) -> Result<DiscreteWaterPour> {
    if weights.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some((index, &value)) = weights
        .iter()
        .enumerate()
        .find(|(_, w)| !(**w > 0.0 && **w <= 1.0))
    {
        return Err(Error::WeightsOutOfRange { index, value });
    }
    let max = weights.iter().copied().fold(0.0, f64::max);
    if max != 1.0 {
        return Err(Error::NoUnitWeight { max });
    }
    Ok(pour_unchecked(weights))
}

/// Pours weights in `[0, 1]` whose sum is at least one. Zero weights get zero mass.
pub(crate) fn pour_unchecked(weights: &[f64]) -> DiscreteWaterPour {
    let level = discrete_level(weights);
    let pmf = weights.iter().map(|w| w.min(level)).collect();
    DiscreteWaterPour {
        input_weights: weights.to_vec(),
        level,
        pmf,
    }
}

/// Solves `sum_j min(w_j, level) = 1` exactly.
///
/// With weights sorted in decreasing order and the level between the k-th and
/// (k+1)-th of them, the sum is `k * level + sum_{i > k} w_i`.
fn discrete_level(weights: &[f64]) -> f64 {
    let mut sorted = weights.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let n = sorted.len();
    // suffix[k] = sum of sorted[k..]
    let mut suffix = vec![0.0; n + 1];
    for k in (0..n).rev() {
        suffix[k] = suffix[k + 1] + sorted[k];
    }
    for k in 1..=n {
        let level = (1.0 - suffix[k]) / k as f64;
        let next = if k < n { sorted[k] } else { 0.0 };
        if level >= next && level <= sorted[k - 1] {
            return level;
        }
    }
    // rounding left no exact segment; every weight is above 1/n
    1.0 / n as f64
}

/// Inverse-CDF categorical sampling from a probability vector.
pub fn sample_discrete<R: Rng + ?Sized>(pmf: &[f64], rng: &mut R, count: usize) -> Vec<usize> {
    assert!(!pmf.is_empty(), "cannot sample from an empty pmf");
    let mut cumulative = Vec::with_capacity(pmf.len());
    let mut acc = 0.0;
    for p in pmf {
        acc += p;
        cumulative.push(acc);
    }
    let last = pmf.len() - 1;
    (0..count)
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            cumulative.partition_point(|&c| c <= u).min(last)
        })
        .collect()
}

//! Weighted particle sets and per-scan filter output.

use nalgebra::SVector;

use crate::error::{Error, Result};

/// Weighted support points of a possibility function (or of a probability
/// density, for the standard filter).
///
/// The possibility filter keeps weights with maximum exactly one; the
/// standard filter keeps weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet<const D: usize> {
    states: Vec<SVector<f64, D>>,
    weights: Vec<f64>,
}

impl<const D: usize> ParticleSet<D> {
    pub fn new(states: Vec<SVector<f64, D>>, weights: Vec<f64>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::EmptyInput);
        }
        if states.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: states.len(),
                got: weights.len(),
            });
        }
        if let Some((index, &value)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w >= 0.0))
        {
            return Err(Error::WeightsOutOfRange { index, value });
        }
        Ok(Self { states, weights })
    }

    pub(crate) fn from_parts(states: Vec<SVector<f64, D>>, weights: Vec<f64>) -> Self {
        debug_assert_eq!(states.len(), weights.len());
        Self { states, weights }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[SVector<f64, D>] {
        &self.states
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Index of the largest weight; the lowest index wins ties.
    pub fn argmax(&self) -> usize {
        argmax(&self.weights)
    }

    pub fn weighted_mean(&self) -> SVector<f64, D> {
        let total = self.weight_sum();
        self.states
            .iter()
            .zip(&self.weights)
            .fold(SVector::zeros(), |acc, (x, w)| acc + x * (*w / total))
    }

    /// Possibility that the state satisfies `predicate`: the largest weight
    /// among the particles that do, or zero if none do.
    pub fn possibility_of_event<F>(&self, mut predicate: F) -> f64
    where
        F: FnMut(&SVector<f64, D>) -> bool,
    {
        self.states
            .iter()
            .zip(&self.weights)
            .filter(|(x, _)| predicate(x))
            .map(|(_, w)| *w)
            .fold(0.0, f64::max)
    }
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Output of one filter scan.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterStepRecord<const D: usize> {
    pub scan: usize,
    /// MAP particle for the possibility filter, weighted mean for the standard one.
    pub estimate: SVector<f64, D>,
    /// Log of the unnormalised peak weight at the estimate. For the standard
    /// filter this is the log of the largest normalised weight.
    pub ln_peak_weight: f64,
}

impl<const D: usize> FilterStepRecord<D> {
    pub fn peak_weight(&self) -> f64 {
        self.ln_peak_weight.exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector1;

    fn set(weights: &[f64]) -> ParticleSet<1> {
        let states = (0..weights.len()).map(|i| Vector1::new(i as f64)).collect();
        ParticleSet::new(states, weights.to_vec()).unwrap()
    }

    #[test]
    fn event_possibility() {
        let ps = set(&[1.0, 0.4, 0.7]);
        assert_eq!(ps.possibility_of_event(|_| true), 1.0);
        assert_eq!(ps.possibility_of_event(|_| false), 0.0);
        assert_eq!(ps.possibility_of_event(|x| x[0] >= 1.0), 0.7);
        assert_eq!(ps.possibility_of_event(|x| x[0] == 1.0), 0.4);
    }

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(argmax(&[0.2, 1.0, 1.0, 0.3]), 1);
        assert_eq!(argmax(&[f64::NEG_INFINITY, f64::NEG_INFINITY]), 0);
    }

    #[test]
    fn rejects_malformed_sets() {
        assert_eq!(
            ParticleSet::<1>::new(vec![], vec![]),
            Err(Error::EmptyInput)
        );
        assert!(ParticleSet::new(vec![Vector1::new(0.0)], vec![-1.0]).is_err());
        assert!(ParticleSet::new(vec![Vector1::new(0.0)], vec![1.0, 1.0]).is_err());
    }
}

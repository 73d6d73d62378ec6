use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{synthesize_measurements, Scenario};
use crate::error::{Error, Result};
use crate::filters::{LinearGaussianTransition, PossibilityParticleFilter, StandardParticleFilter};
use crate::tma::{init_prior, BearingLikelihood, StateVector};

/// A run diverges when its final position error is larger than this (m).
pub const DIVERGENCE_THRESHOLD_M: f64 = 1000.0;

const TRUTH_STREAM: u64 = 0;
const MEASUREMENT_STREAM: u64 = 1;
const FILTER_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterKind {
    Standard,
    Possibility,
}

impl FilterKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Standard => "standard",
            Self::Possibility => "possibility",
        }
    }

    /// Point estimator reported by the filter.
    pub fn estimator(self) -> &'static str {
        match self {
            Self::Standard => "weighted-mean",
            Self::Possibility => "map",
        }
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "standard" | "pf" | "standard-pf" => Ok(Self::Standard),
            "possibility" | "possibility-pf" => Ok(Self::Possibility),
            other => Err(Error::InvalidParameter(format!(
                "unknown filter kind `{other}` (expected `standard` or `possibility`)"
            ))),
        }
    }
}

/// Outcome of one Monte Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub seed: u64,
    pub filter: FilterKind,
    /// Point estimator of `filter`, see [`FilterKind::estimator`].
    pub estimator: &'static str,
    /// Process-noise intensity the run used (m^2/s^3).
    pub q: f64,
    /// Estimated relative position per scan; NaN after a collapse.
    pub estimates: Vec<[f64; 2]>,
    /// Position error per scan (m); infinite after a collapse.
    pub pos_errors: Vec<f64>,
    pub divergent: bool,
    /// Scan at which every particle weight vanished, if any.
    pub collapse_scan: Option<usize>,
}

impl RunReport {
    pub fn final_error(&self) -> f64 {
        *self
            .pos_errors
            .last()
            .expect("runs cover at least two scans")
    }
}

/// Strictly larger than the threshold.
pub fn is_divergent(final_error: f64, threshold: f64) -> bool {
    final_error.is_nan() || final_error > threshold
}

fn position_error(est: &StateVector, truth: &StateVector) -> f64 {
    (est[0] - truth[0]).hypot(est[2] - truth[2])
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Simulates one engagement and filters it.
///
/// Truth, measurements and filter use separate random streams derived from
/// `seed`, so both filter kinds see the same truth and measurements for the
/// same seed.
pub fn run_single(
    scenario: &Scenario,
    filter: FilterKind,
    particles: usize,
    seed: u64,
) -> Result<RunReport> {
    let target = scenario.sample_target_track(&mut stream(seed, TRUTH_STREAM))?;
    let truth = scenario.relative_track(&target);
    let z = synthesize_measurements(scenario, &truth, &mut stream(seed, MEASUREMENT_STREAM))?;
    let mut rng = stream(seed, FILTER_STREAM);

    let o1 = scenario.observer().states()[0];
    let prior = init_prior(z[0], (o1[1], o1[3]), scenario.prior_config())?;
    let likelihood = BearingLikelihood::new(scenario.filter_sigma())?;
    let dynamics = scenario.dynamics();
    let base =
        LinearGaussianTransition::new(dynamics.transition_matrix(), dynamics.process_noise()?)?;

    let mut estimates = Vec::with_capacity(truth.len());
    let mut collapse_scan = None;
    match filter {
        FilterKind::Possibility => {
            let mut pf = PossibilityParticleFilter::new(&prior, particles, &mut rng)?;
            estimates.push(pf.estimate());
            for k in 2..=scenario.scans() {
                let tr = base.with_input(*scenario.input_into(k));
                match pf.step(&tr, &likelihood, &z[k - 1], &mut rng) {
                    Ok(rec) => estimates.push(rec.estimate),
                    Err(Error::AllWeightsZero { .. }) => {
                        collapse_scan = Some(k);
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        FilterKind::Standard => {
            let mut pf = StandardParticleFilter::new(&prior, particles, &mut rng)?;
            estimates.push(pf.estimate());
            for k in 2..=scenario.scans() {
                let tr = base.with_input(*scenario.input_into(k));
                match pf.step(&tr, &likelihood, &z[k - 1], &mut rng) {
                    Ok(rec) => estimates.push(rec.estimate),
                    Err(Error::AllWeightsZero { .. }) => {
                        collapse_scan = Some(k);
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }

    let mut pos_errors: Vec<f64> = estimates
        .iter()
        .zip(&truth)
        .map(|(e, t)| position_error(e, t))
        .collect();
    let mut positions: Vec<[f64; 2]> = estimates.iter().map(|e| [e[0], e[2]]).collect();
    pos_errors.resize(truth.len(), f64::INFINITY);
    positions.resize(truth.len(), [f64::NAN, f64::NAN]);
    let divergent = is_divergent(*pos_errors.last().unwrap(), DIVERGENCE_THRESHOLD_M);

    Ok(RunReport {
        seed,
        filter,
        estimator: filter.estimator(),
        q: dynamics.q,
        estimates: positions,
        pos_errors,
        divergent,
        collapse_scan,
    })
}

/// Per-scan statistics over a batch of runs.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchAggregate {
    /// RMS position error per scan over non-divergent runs; NaN when every
    /// run diverged.
    pub rms: Vec<f64>,
    /// Number of non-divergent runs entering the RMS.
    pub alive: usize,
    pub divergent: usize,
    pub runs: usize,
}

impl BatchAggregate {
    pub fn divergence_pct(&self) -> f64 {
        100.0 * self.divergent as f64 / self.runs as f64
    }

    pub fn from_reports(reports: &[RunReport]) -> Self {
        let scans = reports.first().map_or(0, |r| r.pos_errors.len());
        let alive: Vec<&RunReport> = reports.iter().filter(|r| !r.divergent).collect();
        let rms = (0..scans)
            .map(|k| {
                if alive.is_empty() {
                    return f64::NAN;
                }
                let ss: f64 = alive.iter().map(|r| r.pos_errors[k].powi(2)).sum();
                (ss / alive.len() as f64).sqrt()
            })
            .collect();
        Self {
            rms,
            alive: alive.len(),
            divergent: reports.len() - alive.len(),
            runs: reports.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchResult {
    pub reports: Vec<RunReport>,
    pub aggregate: BatchAggregate,
}

/// Runs `runs` independent engagements with seeds `base_seed + i`.
///
/// Runs are spread over `parallelism` worker threads; the reports come back
/// in run order, so the result does not depend on the thread count.
pub fn run_batch(
    scenario: &Scenario,
    filter: FilterKind,
    particles: usize,
    runs: usize,
    base_seed: u64,
    parallelism: usize,
) -> Result<BatchResult> {
    if runs == 0 {
        return Err(Error::InvalidParameter("runs must be at least 1".into()));
    }
    let work = || -> Result<Vec<RunReport>> {
        (0..runs as u64)
            .into_par_iter()
            .map(|i| run_single(scenario, filter, particles, base_seed.wrapping_add(i)))
            .collect()
    };
    let reports = if parallelism <= 1 {
        (0..runs as u64)
            .map(|i| run_single(scenario, filter, particles, base_seed.wrapping_add(i)))
            .collect::<Result<Vec<_>>>()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(parallelism)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(work)?
    };
    let aggregate = BatchAggregate::from_reports(&reports);
    Ok(BatchResult { reports, aggregate })
}

use nalgebra::Vector4;
use rand::Rng;
use rand_distr::StandardNormal;

use super::NoiseModel;
use crate::error::{Error, Result};
use crate::tma::{
    bearing, observer_input, wrap_angle, DynamicsConfig, InitPriorConfig, ObserverTrajectory,
    StateVector,
};

/// Default process-noise intensity (m^2/s^3).
pub const DEFAULT_Q: f64 = 1e-3;

/// Engagement parameters in SI units. Courses and bearings are clockwise
/// from north.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scans: usize,
    pub interval: f64,
    /// Initial target range from the observer (m).
    pub target_range: f64,
    /// Initial true bearing of the target (rad).
    pub target_bearing: f64,
    pub target_speed: f64,
    pub target_course: f64,
    pub observer_speed: f64,
    pub observer_course_leg1: f64,
    pub observer_course_leg2: f64,
    /// Scans on the first leg; half the scenario when unset.
    pub leg1_scans: Option<usize>,
    pub q: f64,
    /// Whether the true target is driven by the same process noise the
    /// filters assume.
    pub truth_process_noise: bool,
    pub true_noise: NoiseModel,
    /// Bearing sigma assumed by both filters (rad).
    pub filter_sigma: f64,
    pub prior: InitPriorConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let sigma = 1f64.to_radians();
        Self {
            scans: 30,
            interval: 40.0,
            target_range: 10_000.0,
            target_bearing: 0.0,
            target_speed: 4.0,
            target_course: 140f64.to_radians(),
            observer_speed: 2.5,
            observer_course_leg1: 70f64.to_radians(),
            observer_course_leg2: 340f64.to_radians(),
            leg1_scans: None,
            q: DEFAULT_Q,
            truth_process_noise: false,
            true_noise: NoiseModel::Gaussian { sigma },
            filter_sigma: sigma,
            prior: InitPriorConfig::default(),
        }
    }
}

fn velocity(speed: f64, course: f64) -> (f64, f64) {
    let (s, c) = course.sin_cos();
    (speed * s, speed * c)
}

/// One simulated engagement: known observer motion, target initial state,
/// and the noise models.
#[derive(Debug, Clone)]
pub struct Scenario {
    config: ScenarioConfig,
    observer: ObserverTrajectory,
    target_init: StateVector,
    dynamics: DynamicsConfig,
    inputs: Vec<StateVector>,
    leg1_scans: usize,
}

/// Builds the observer and target from the configuration.
///
/// The observer starts at the origin and turns instantaneously after its
/// first leg; positions keep advancing with the pre-turn velocity up to the
/// turn scan.
pub fn build_canonical_scenario(config: &ScenarioConfig) -> Result<Scenario> {
    let c = config;
    if c.scans < 2 {
        return Err(Error::InvalidParameter(format!(
            "scenario needs at least 2 scans, got {}",
            c.scans
        )));
    }
    let leg1 = c.leg1_scans.unwrap_or(c.scans / 2);
    if leg1 == 0 || leg1 >= c.scans {
        return Err(Error::InvalidParameter(format!(
            "first observer leg must cover 1..{} scans so the observer manoeuvres, got {leg1}",
            c.scans - 1
        )));
    }
    let finite = [
        c.target_range,
        c.target_bearing,
        c.target_speed,
        c.target_course,
        c.observer_speed,
        c.observer_course_leg1,
        c.observer_course_leg2,
    ];
    if finite.iter().any(|v| !v.is_finite()) || c.target_range <= 0.0 {
        return Err(Error::InvalidParameter(
            "scenario geometry must be finite with positive range".into(),
        ));
    }
    if c.target_speed < 0.0 || c.observer_speed < 0.0 {
        return Err(Error::InvalidParameter(
            "speeds must be non-negative".into(),
        ));
    }
    if !(c.filter_sigma > 0.0 && c.filter_sigma.is_finite()) {
        return Err(Error::InvalidParameter(
            "filter sigma must be positive".into(),
        ));
    }
    c.true_noise.validate()?;
    let dynamics = DynamicsConfig::new(c.interval, c.q)?;
    if c.q <= 0.0 {
        return Err(Error::InvalidParameter(
            "process noise intensity must be positive".into(),
        ));
    }

    let (v1x, v1y) = velocity(c.observer_speed, c.observer_course_leg1);
    let (v2x, v2y) = velocity(c.observer_speed, c.observer_course_leg2);
    let mut states = Vec::with_capacity(c.scans);
    let mut current = Vector4::new(0.0, v1x, 0.0, v1y);
    states.push(current);
    for k in 1..c.scans {
        let (vx, vy) = if k < leg1 { (v1x, v1y) } else { (v2x, v2y) };
        current = Vector4::new(
            current[0] + c.interval * current[1],
            vx,
            current[2] + c.interval * current[3],
            vy,
        );
        states.push(current);
    }
    let inputs = states
        .windows(2)
        .map(|w| observer_input(&w[1], &w[0], c.interval))
        .collect();
    let observer = ObserverTrajectory::new(states, c.interval)?;

    let (tx, ty) = velocity(c.target_speed, c.target_course);
    let (s, co) = c.target_bearing.sin_cos();
    let target_init = Vector4::new(c.target_range * s, tx, c.target_range * co, ty);

    Ok(Scenario {
        config: config.clone(),
        observer,
        target_init,
        dynamics,
        inputs,
        leg1_scans: leg1,
    })
}

impl Scenario {
    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn scans(&self) -> usize {
        self.config.scans
    }

    pub fn interval(&self) -> f64 {
        self.config.interval
    }

    pub fn observer(&self) -> &ObserverTrajectory {
        &self.observer
    }

    pub fn target_init(&self) -> &StateVector {
        &self.target_init
    }

    pub fn dynamics(&self) -> &DynamicsConfig {
        &self.dynamics
    }

    pub fn true_noise(&self) -> &NoiseModel {
        &self.config.true_noise
    }

    pub fn filter_sigma(&self) -> f64 {
        self.config.filter_sigma
    }

    pub fn prior_config(&self) -> &InitPriorConfig {
        &self.config.prior
    }

    /// First scan (1-based) on the second observer leg.
    pub fn maneuver_scan(&self) -> usize {
        self.leg1_scans + 1
    }

    /// Observer input for the transition into scan `k` (1-based, `k >= 2`).
    pub fn input_into(&self, k: usize) -> &StateVector {
        &self.inputs[k - 2]
    }

    pub fn observer_inputs(&self) -> &[StateVector] {
        &self.inputs
    }

    /// Same scenario with another true noise model.
    pub fn with_true_noise(&self, noise: NoiseModel) -> Result<Self> {
        noise.validate()?;
        let mut s = self.clone();
        s.config.true_noise = noise;
        Ok(s)
    }

    /// Noise-free constant-velocity target track (absolute).
    pub fn nominal_target_track(&self) -> Vec<StateVector> {
        let f = self.dynamics.transition_matrix();
        std::iter::successors(Some(self.target_init), |x| Some(f * x))
            .take(self.scans())
            .collect()
    }

    /// Target track driven by white-acceleration noise when enabled,
    /// otherwise the nominal one.
    pub fn sample_target_track<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<StateVector>> {
        if !self.config.truth_process_noise {
            return Ok(self.nominal_target_track());
        }
        let f = self.dynamics.transition_matrix();
        let chol = self
            .dynamics
            .process_noise()?
            .cholesky()
            .ok_or(Error::NotPositiveDefinite)?
            .unpack();
        let mut track = Vec::with_capacity(self.scans());
        let mut x = self.target_init;
        track.push(x);
        for _ in 1..self.scans() {
            let white = Vector4::<f64>::from_fn(|_, _| rng.sample(StandardNormal));
            x = f * x + chol * white;
            track.push(x);
        }
        Ok(track)
    }

    /// Target minus observer, scan by scan.
    pub fn relative_track(&self, target: &[StateVector]) -> Vec<StateVector> {
        target
            .iter()
            .zip(self.observer.states())
            .map(|(t, o)| t - o)
            .collect()
    }

    pub fn nominal_relative_track(&self) -> Vec<StateVector> {
        self.relative_track(&self.nominal_target_track())
    }
}

/// True bearings plus draws from the scenario's noise model, wrapped into
/// `(-pi, pi]`.
pub fn synthesize_measurements<R: Rng + ?Sized>(
    scenario: &Scenario,
    relative_truth: &[StateVector],
    rng: &mut R,
) -> Result<Vec<f64>> {
    relative_truth
        .iter()
        .map(|x| Ok(wrap_angle(bearing(x)? + scenario.true_noise().sample(rng))))
        .collect()
}

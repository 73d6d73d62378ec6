//! Bearings-only target motion analysis models.
//!
//! States are relative (target minus observer) and ordered `[x, vx, y, vy]`
//! in metres and metres per second. Bearings are measured from the +y axis
//! (north) clockwise towards +x (east), i.e. `atan2(x, y)`.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix4, RowVector4, Vector4};

use crate::error::{Error, Result};
use crate::filters::Likelihood;
use crate::possibility::GaussianPossibility;

pub type StateVector = Vector4<f64>;

/// Relative target state, target minus observer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeState {
    pub x: f64,
    pub vx: f64,
    pub y: f64,
    pub vy: f64,
}

impl RelativeState {
    pub fn new(x: f64, vx: f64, y: f64, vy: f64) -> Result<Self> {
        let s = Self { x, vx, y, vy };
        if s.to_vector().iter().all(|v| v.is_finite()) {
            Ok(s)
        } else {
            Err(Error::InvalidParameter(
                "relative state must be finite".into(),
            ))
        }
    }

    pub fn to_vector(self) -> StateVector {
        Vector4::new(self.x, self.vx, self.y, self.vy)
    }

    pub fn from_vector(v: &StateVector) -> Self {
        Self {
            x: v[0],
            vx: v[1],
            y: v[2],
            vy: v[3],
        }
    }
}

/// Known absolute observer states, one per scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverTrajectory {
    states: Vec<StateVector>,
}

impl ObserverTrajectory {
    /// Checks that positions advance with the velocity held at the previous
    /// scan; velocities may jump between scans.
    pub fn new(states: Vec<StateVector>, interval: f64) -> Result<Self> {
        if states.len() < 2 {
            return Err(Error::InvalidParameter(
                "observer trajectory needs at least two scans".into(),
            ));
        }
        for (k, pair) in states.windows(2).enumerate() {
            let (a, b) = (&pair[0], &pair[1]);
            let scale = 1.0 + a.abs().max() + b.abs().max();
            let ex = b[0] - (a[0] + interval * a[1]);
            let ey = b[2] - (a[2] + interval * a[3]);
            if ex.abs().max(ey.abs()) > 1e-9 * scale {
                return Err(Error::InvalidParameter(format!(
                    "observer leg inconsistent between scans {} and {}",
                    k + 1,
                    k + 2
                )));
            }
        }
        Ok(Self { states })
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Sampling interval (s) and process-noise intensity (m^2/s^3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsConfig {
    pub interval: f64,
    pub q: f64,
}

impl DynamicsConfig {
    pub fn new(interval: f64, q: f64) -> Result<Self> {
        if !(interval > 0.0 && interval.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sampling interval must be positive, got {interval}"
            )));
        }
        if !(q >= 0.0 && q.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "process noise intensity must be non-negative, got {q}"
            )));
        }
        Ok(Self { interval, q })
    }

    pub fn transition_matrix(&self) -> Matrix4<f64> {
        transition_matrix(self.interval)
    }

    pub fn process_noise(&self) -> Result<Matrix4<f64>> {
        process_noise_matrix(self.interval, self.q)
    }
}

fn kron_i2(block: Matrix2<f64>) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&block);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(&block);
    m
}

/// Constant-velocity transition `I2 (x) [1 T; 0 1]`.
pub fn transition_matrix(interval: f64) -> Matrix4<f64> {
    kron_i2(Matrix2::new(1.0, interval, 0.0, 1.0))
}

/// Observer input `U = x^o_{k+1} - F x^o_k`; zero while the observer keeps
/// a constant velocity.
pub fn observer_input(next: &StateVector, current: &StateVector, interval: f64) -> StateVector {
    next - transition_matrix(interval) * current
}

/// White-acceleration process noise `I2 (x) q [T^3/3 T^2/2; T^2/2 T]`.
pub fn process_noise_matrix(interval: f64, q: f64) -> Result<Matrix4<f64>> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "process noise intensity must be positive for filtering, got {q}"
        )));
    }
    if !(interval > 0.0 && interval.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sampling interval must be positive, got {interval}"
        )));
    }
    let t = interval;
    Ok(kron_i2(
        Matrix2::new(t.powi(3) / 3.0, t * t / 2.0, t * t / 2.0, t) * q,
    ))
}

/// Bearing of the relative position, `atan2(x, y)`, in `(-pi, pi]`.
pub fn bearing(x: &StateVector) -> Result<f64> {
    if x[0] == 0.0 && x[2] == 0.0 {
        return Err(Error::AtOrigin);
    }
    Ok(x[0].atan2(x[2]))
}

/// Maps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Transition possibility with mean `F x - U` and spread `Q`.
pub fn transition_possibility(
    prev: &StateVector,
    matrix: &Matrix4<f64>,
    input: &StateVector,
    spread: &Matrix4<f64>,
) -> Result<GaussianPossibility<4>> {
    GaussianPossibility::new(matrix * prev - input, *spread)
}

/// Gaussian bearing likelihood with wrapped residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BearingLikelihood {
    sigma: f64,
}

impl BearingLikelihood {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bearing sigma must be positive, got {sigma}"
            )));
        }
        Ok(Self { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Possibility of the bearing `z` given state `x`, in `(0, 1]`.
    pub fn eval(&self, x: &StateVector, z: f64) -> Result<f64> {
        let r = wrap_angle(z - bearing(x)?) / self.sigma;
        Ok((-0.5 * r * r).exp())
    }
}

impl Likelihood<4, f64> for BearingLikelihood {
    fn ln_likelihood(&self, x: &StateVector, z: &f64) -> f64 {
        match bearing(x) {
            Ok(h) => {
                let r = wrap_angle(z - h) / self.sigma;
                -0.5 * r * r
            }
            Err(_) => f64::NEG_INFINITY,
        }
    }
}

/// Orientation of the position covariance of the initial prior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitCovariance {
    /// Range variance along the line of sight, cross-range variance across it.
    #[default]
    Consistent,
    /// The alternative printed form with sine and cosine exchanged in the
    /// diagonal terms.
    Swapped,
}

/// Parameters of the measurement-based prior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitPriorConfig {
    /// Assumed range (m).
    pub range: f64,
    /// Range standard deviation (m).
    pub range_sigma: f64,
    /// Bearing standard deviation (rad).
    pub bearing_sigma: f64,
    /// Per-axis relative velocity standard deviations (m/s).
    pub velocity_sigma: (f64, f64),
    pub covariance: InitCovariance,
}

impl Default for InitPriorConfig {
    fn default() -> Self {
        Self {
            range: 10_000.0,
            range_sigma: 3_500.0,
            bearing_sigma: 1f64.to_radians(),
            velocity_sigma: (2.6, 2.6),
            covariance: InitCovariance::Consistent,
        }
    }
}

/// Prior from the first bearing: the target is placed at the assumed range
/// along `z1` and assumed stationary, so its relative velocity is minus the
/// observer velocity.
pub fn init_prior(
    z1: f64,
    observer_velocity: (f64, f64),
    cfg: &InitPriorConfig,
) -> Result<GaussianPossibility<4>> {
    let positive = [
        cfg.range,
        cfg.range_sigma,
        cfg.bearing_sigma,
        cfg.velocity_sigma.0,
        cfg.velocity_sigma.1,
    ];
    if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidParameter(
            "prior range, sigmas and velocity sigmas must be positive".into(),
        ));
    }
    let (s, c) = z1.sin_cos();
    let range_var = cfg.range_sigma.powi(2);
    let cross_var = (cfg.range * cfg.bearing_sigma).powi(2);
    let (var_x, var_y) = match cfg.covariance {
        InitCovariance::Consistent => (
            range_var * s * s + cross_var * c * c,
            range_var * c * c + cross_var * s * s,
        ),
        InitCovariance::Swapped => (
            range_var * c * c + cross_var * s * s,
            range_var * s * s + cross_var * c * c,
        ),
    };
    let cov_xy = (range_var - cross_var) * s * c;

    let mean = Vector4::new(
        cfg.range * s,
        -observer_velocity.0,
        cfg.range * c,
        -observer_velocity.1,
    );
    #[rustfmt::skip]
    let spread = Matrix4::new(
        var_x, 0.0, cov_xy, 0.0,
        0.0, cfg.velocity_sigma.0.powi(2), 0.0, 0.0,
        cov_xy, 0.0, var_y, 0.0,
        0.0, 0.0, 0.0, cfg.velocity_sigma.1.powi(2),
    );
    GaussianPossibility::new(mean, spread)
}

/// Jacobian of the bearing with respect to the relative state.
pub fn bearing_jacobian(x: &StateVector) -> Result<RowVector4<f64>> {
    let r2 = x[0] * x[0] + x[2] * x[2];
    if r2 == 0.0 {
        return Err(Error::AtOrigin);
    }
    Ok(RowVector4::new(x[2] / r2, 0.0, -x[0] / r2, 0.0))
}

/// Information recursion for the Cramér–Rao bound along a known trajectory.
///
/// `J_1 = P_1^-1`, `J_k = (F J_{k-1}^-1 F' + Q)^-1 + H_k' H_k / sigma^2`.
/// Returns the bound matrices `J_k^-1`, one per scan.
pub fn crlb_curve(
    truth: &[StateVector],
    dynamics: &DynamicsConfig,
    sigma: f64,
    prior_spread: &Matrix4<f64>,
) -> Result<Vec<Matrix4<f64>>> {
    if truth.is_empty() {
        return Err(Error::EmptyInput);
    }
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::InvalidParameter(
            "bearing sigma must be positive".into(),
        ));
    }
    let f = dynamics.transition_matrix();
    let q = dynamics.process_noise()?;
    let mut bound = *prior_spread;
    prior_spread
        .cholesky()
        .ok_or(Error::SingularInformation { scan: 1 })?;
    let mut bounds = Vec::with_capacity(truth.len());
    bounds.push(bound);
    for (k, x) in truth.iter().enumerate().skip(1) {
        let scan = k + 1;
        let predicted = f * bound * f.transpose() + q;
        let h = bearing_jacobian(x)?;
        let info = predicted
            .cholesky()
            .ok_or(Error::SingularInformation { scan })?
            .inverse()
            + h.transpose() * h / (sigma * sigma);
        let info = 0.5 * (info + info.transpose());
        bound = info
            .cholesky()
            .ok_or(Error::SingularInformation { scan })?
            .inverse();
        if bound.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularInformation { scan });
        }
        bounds.push(bound);
    }
    Ok(bounds)
}

/// RMS position bound `sqrt(B_xx + B_yy)`.
pub fn position_bound(bound: &Matrix4<f64>) -> f64 {
    (bound[(0, 0)] + bound[(2, 2)]).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transition_matrix_examples() {
        let f = transition_matrix(40.0);
        #[rustfmt::skip]
        let expected = Matrix4::new(
            1.0, 40.0, 0.0, 0.0,
            0.0, 1.0, 0.0, 0.0,
            0.0, 0.0, 1.0, 40.0,
            0.0, 0.0, 0.0, 1.0,
        );
        assert_eq!(f, expected);
        assert_eq!(transition_matrix(1.0)[(0, 1)], 1.0);
        assert_eq!(f * Vector4::zeros(), Vector4::zeros());
    }

    #[test]
    fn process_noise_examples() {
        let q = process_noise_matrix(1.0, 1.0).unwrap();
        assert!((q[(0, 0)] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(q[(0, 1)], 0.5);
        assert_eq!(q[(1, 1)], 1.0);
        assert_eq!(q[(2, 3)], 0.5);
        assert_eq!(q[(0, 2)], 0.0);

        let q = process_noise_matrix(40.0, 1e-6).unwrap();
        assert!((q[(0, 0)] - 64000.0 / 3.0 * 1e-6).abs() < 1e-12);
        assert!((q[(0, 1)] - 0.8e-3).abs() < 1e-15);
        assert!((q[(1, 1)] - 4e-5).abs() < 1e-15);
        assert!(q.cholesky().is_some());

        assert!(process_noise_matrix(40.0, 0.0).is_err());
    }

    #[test]
    fn observer_input_examples() {
        let xo = Vector4::new(0.0, 2.0, 5.0, -1.0);
        let next_cv = transition_matrix(40.0) * xo;
        assert_eq!(observer_input(&next_cv, &xo, 40.0), Vector4::zeros());

        let mut next = next_cv;
        next[1] += 1.5;
        let u = observer_input(&next, &xo, 40.0);
        assert_eq!(u, Vector4::new(0.0, 1.5, 0.0, 0.0));
    }

    #[test]
    fn bearing_examples() {
        assert_eq!(
            bearing(&Vector4::new(0.0, 0.0, 10_000.0, 0.0)).unwrap(),
            0.0
        );
        assert!(
            (bearing(&Vector4::new(10_000.0, 0.0, 0.0, 0.0)).unwrap() - PI / 2.0).abs() < 1e-15
        );
        assert!((bearing(&Vector4::new(-1.0, 0.0, -1.0, 0.0)).unwrap() + 0.75 * PI).abs() < 1e-15);
        assert_eq!(bearing(&Vector4::zeros()), Err(Error::AtOrigin));
    }

    #[test]
    fn wrap_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert!((wrap_angle(0.1 + 4.0 * PI) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn likelihood_examples() {
        let lik = BearingLikelihood::new(0.02).unwrap();
        let x = Vector4::new(3_000.0, 0.0, 4_000.0, 0.0);
        let h = bearing(&x).unwrap();
        assert_eq!(lik.eval(&x, h).unwrap(), 1.0);
        assert!((lik.eval(&x, h + 0.02).unwrap() - (-0.5f64).exp()).abs() < 1e-12);
        assert!((lik.eval(&x, h + 2.0 * PI).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(lik.eval(&Vector4::zeros(), 0.0), Err(Error::AtOrigin));
        assert_eq!(
            lik.ln_likelihood(&Vector4::zeros(), &0.0),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn transition_possibility_examples() {
        let f = transition_matrix(40.0);
        let q = process_noise_matrix(40.0, 1e-3).unwrap();
        let p = transition_possibility(&Vector4::zeros(), &f, &Vector4::zeros(), &q).unwrap();
        assert_eq!(*p.mean(), Vector4::zeros());
        assert_eq!(*p.spread(), q);
        assert_eq!(p.eval(&Vector4::zeros()), 1.0);
    }

    #[test]
    fn init_prior_orientation() {
        let cfg = InitPriorConfig::default();
        let cross = (cfg.range * cfg.bearing_sigma).powi(2);
        let range = cfg.range_sigma.powi(2);

        let p = init_prior(0.0, (1.0, 2.0), &cfg).unwrap();
        let m = p.mean();
        assert!(m[0].abs() < 1e-9 && (m[2] - 10_000.0).abs() < 1e-9);
        assert_eq!((m[1], m[3]), (-1.0, -2.0));
        let s = p.spread();
        assert!((s[(0, 0)] - cross).abs() < 1e-6);
        assert!((s[(2, 2)] - range).abs() < 1e-6);
        assert!(s[(0, 2)].abs() < 1e-6);

        let lit = InitPriorConfig {
            covariance: InitCovariance::Swapped,
            ..cfg
        };
        let s = *init_prior(0.0, (0.0, 0.0), &lit).unwrap().spread();
        assert!((s[(0, 0)] - range).abs() < 1e-6);
        assert!((s[(2, 2)] - cross).abs() < 1e-6);

        for c in [cfg, lit] {
            let a = *init_prior(0.0, (0.0, 0.0), &c).unwrap().spread();
            let b = *init_prior(PI / 2.0, (0.0, 0.0), &c).unwrap().spread();
            assert!((a[(0, 0)] - b[(2, 2)]).abs() < 1e-6);
            assert!((a[(2, 2)] - b[(0, 0)]).abs() < 1e-6);
        }
    }

    #[test]
    fn jacobian_due_north() {
        let h = bearing_jacobian(&Vector4::new(0.0, 0.0, 10_000.0, 0.0)).unwrap();
        assert_eq!(h, RowVector4::new(1e-4, 0.0, 0.0, 0.0));
    }

    #[test]
    fn crlb_single_scan_is_prior() {
        let spread = *init_prior(0.3, (1.0, 1.0), &InitPriorConfig::default())
            .unwrap()
            .spread();
        let truth = [Vector4::new(3_000.0, 0.0, 9_000.0, 0.0)];
        let dynamics = DynamicsConfig::new(40.0, 1e-3).unwrap();
        let b = crlb_curve(&truth, &dynamics, 0.01, &spread).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0], spread);
    }

    #[test]
    fn observer_trajectory_validation() {
        let a = Vector4::new(0.0, 1.0, 0.0, 2.0);
        let b = Vector4::new(40.0, -3.0, 80.0, 0.5);
        assert!(ObserverTrajectory::new(vec![a, b], 40.0).is_ok());
        let bad = Vector4::new(41.0, 1.0, 80.0, 2.0);
        assert!(ObserverTrajectory::new(vec![a, bad], 40.0).is_err());
        assert!(ObserverTrajectory::new(vec![a], 40.0).is_err());
    }
}

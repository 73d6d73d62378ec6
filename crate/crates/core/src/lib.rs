//! Possibilistic state estimation and a bearings-only target motion
//! analysis benchmark.
//!
//! - [`possibility`]: Gaussian possibility functions.
//! - [`water`]: water pouring of continuous and discrete possibilities, and
//!   samplers for the resulting probability laws.
//! - [`filters`]: the possibility particle filter and a bootstrap particle
//!   filter baseline.
//! - [`tma`]: bearings-only models, measurement-based initialisation and the
//!   Cramér–Rao bound.
//! - [`bench`]: scenarios, measurement synthesis and Monte Carlo experiments.
//! - [`config`] and [`cli`]: the command-line front end.

pub mod bench;
pub mod cli;
pub mod config;
pub mod error;
pub mod filters;
pub mod particles;
pub mod possibility;
pub mod special;
pub mod tma;
pub mod water;

pub use error::{Error, Result};
pub use particles::{FilterStepRecord, ParticleSet};
pub use possibility::{normalize_density_to_possibility, GaussianPossibility};
pub use water::{
    sample_discrete, water_pour_continuous, water_pour_discrete, DiscreteWaterPour,
    WaterPouredDensity,
};

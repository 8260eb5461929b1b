//! Particle worldlines: guidance along the probability flow, the general
//! coupled equation of motion, velocity-stationarity diagnostics, and the
//! classical electromagnetic / scalar-potential testbeds.
//!
//! All integrators are pure `state -> state` maps over a read-only
//! [`CurrentHistory`]; any number of worldlines may be integrated
//! concurrently against the same history.

pub mod classical;
pub mod general_eom;
pub mod guidance;
pub mod interpolate;
mod rk4;

pub use interpolate::{CurrentHistory, FlowSample};

use crate::geometry::SpacetimeVector;

/// Instantaneous particle state.
#[derive(Clone, Copy, Debug)]
pub struct ParticleState {
    /// Spatial position (unwrapped; field lookups wrap periodically).
    pub position: f64,
    /// Coordinate time.
    pub t: f64,
    /// Proper time along the worldline, d tau = dt / u0.
    pub proper_time: f64,
    /// 4-velocity, u.u = 1 up to integrator tolerance.
    pub u: SpacetimeVector,
    pub mass: f64,
}

impl ParticleState {
    pub fn new(position: f64, t: f64, u: SpacetimeVector, mass: f64) -> Self {
        Self {
            position,
            t,
            proper_time: 0.0,
            u,
            mass,
        }
    }

    /// |u.u - 1|, the normalization defect every integrator must keep small.
    pub fn normalization_defect(&self) -> f64 {
        (self.u.norm_sq() - 1.0).abs()
    }
}

/// Which integrator produced a worldline.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntegratorMethod {
    Guidance,
    GeneralEom,
    LorentzForce,
    ScalarForce,
}

impl IntegratorMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Guidance => "guidance",
            Self::GeneralEom => "general_eom",
            Self::LorentzForce => "lorentz_force",
            Self::ScalarForce => "scalar_force",
        }
    }
}

/// One recorded worldline sample.
#[derive(Clone, Copy, Debug)]
pub struct WorldlineSample {
    pub t: f64,
    pub x: f64,
    pub u: SpacetimeVector,
    pub tau: f64,
}

/// A recorded worldline with integrator metadata.
#[derive(Clone, Debug)]
pub struct Worldline {
    pub samples: Vec<WorldlineSample>,
    pub method: IntegratorMethod,
    pub step: f64,
}

impl Worldline {
    pub fn new(method: IntegratorMethod, step: f64) -> Self {
        Self {
            samples: Vec::new(),
            method,
            step,
        }
    }

    pub fn record(&mut self, p: &ParticleState) {
        if let Some(last) = self.samples.last() {
            assert!(
                p.t > last.t && p.proper_time > last.tau,
                "worldline times must increase strictly"
            );
        }
        self.samples.push(WorldlineSample {
            t: p.t,
            x: p.position,
            u: p.u,
            tau: p.proper_time,
        });
    }

    pub fn max_normalization_defect(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| (s.u.norm_sq() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

pub(crate) use rk4::rk4_step;

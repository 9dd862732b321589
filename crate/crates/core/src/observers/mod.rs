//! Constructive ideal observers for static and tumbling alignment.
//!
//! All solvers assume noiseless data with exact (or finite-difference)
//! derivatives and take segment boundaries from the caller; nothing here
//! detects motion.

mod accel_aided;
mod initial_attitude;
mod multi_axis;
mod report;
mod rotation;
mod statics;

pub use accel_aided::{accel_aided_resolve, AccelStub, AccelStubSample, AidedResolution, VelocityRef};
pub use initial_attitude::{initial_attitude_lsq, replay_residual, BodyAttitudeIntegrator};
pub use multi_axis::{multi_axis_solve, MultiAxisSolution};
pub use report::{run_rotation_observer, AttitudeSolution, ObserverReport, RateSummary, RotationObserver};
pub use rotation::{
    accel_bias_candidates, bias_candidates, feasible_pairs, gyro_bias_candidates, io_ncr_omega, io_nfvr_omega,
    rotation_samples, sign_rule_pairs, BiasCandidateSet, FeasiblePair, PairCheck, RotationSample,
};
pub use statics::{
    multiposition_solve, static_constraint_residuals, MultipositionSolution, StaticPosture, StaticResiduals,
};

use crate::attitude::AttitudeError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObserverError {
    #[error("rotation Gram matrix is singular (condition {0:e})")]
    SingularGram(f64),
    #[error("specific-force derivative vanishes at t = {0} s")]
    VanishingFdot(f64),
    #[error("recovered rotation axis is not fixed (spread {0:e} rad)")]
    AxisNotFixed(f64),
    #[error("per-sample bias solutions disagree by {deviation:e} (limit {limit:e})")]
    InconsistentSegment { deviation: f64, limit: f64 },
    #[error("no candidate bias pair satisfies the earth-rate/gravity dot-product constraint")]
    NoFeasiblePair,
    #[error("gravity-cone Gram is ill-conditioned (ratio {0:e}); the window is too short")]
    IllConditionedGram(f64),
    #[error("static postures are coplanar; at least four non-coplanar positions are needed")]
    CoplanarPositions,
    #[error("rotation axes of all segments are parallel")]
    DependentAxes,
    #[error("no specific-force derivative along the rotation axis; the axial bias stays ambiguous")]
    NoAxialInformation,
    #[error("record at t = {0} s has no derivatives")]
    MissingDerivatives(f64),
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error(transparent)]
    Geometry(#[from] AttitudeError),
}

/// Tolerances of the ideal observers, all relative to the natural scale of the
/// quantity they test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObserverTolerances {
    /// Max condition number of the rotation-rate Gram.
    pub gram_condition: f64,
    /// `|f'|` floor relative to `|omega_nb| g` for the varying-rate observer.
    pub fdot_floor: f64,
    /// Max angle [rad] between per-sample axes of a fixed-axis rotation.
    pub axis_spread: f64,
    /// Max per-sample deviation of a bias candidate, relative to g or Omega.
    pub consistency: f64,
    /// Candidate pairs closer than this (relative to g or Omega) count as one.
    pub collapse: f64,
    /// Max dot-product constraint residual, relative to g Omega, for a feasible pair.
    pub feasibility: f64,
    /// Max eigenvalue ratio (largest / second) of the gravity-cone Gram.
    pub cone_ratio: f64,
}

impl Default for ObserverTolerances {
    fn default() -> Self {
        Self {
            gram_condition: 1e10,
            fdot_floor: 1e-9,
            axis_spread: 1e-6,
            consistency: 1e-9,
            collapse: 1e-7,
            feasibility: 1e-6,
            cone_ratio: 1e8,
        }
    }
}

/// Trapezoid weights (in units of the sample spacing) for `n` samples.
pub(crate) fn trapezoid(n: usize, i: usize) -> f64 {
    if i == 0 || i + 1 == n {
        0.5
    } else {
        1.0
    }
}

/// Kahan-compensated running sum for vectors and matrices; long segments
/// otherwise lose several digits to plain accumulation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Compensated<T> {
    sum: T,
    carry: T,
}

impl<T> Compensated<T>
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T>,
{
    pub(crate) fn new(zero: T) -> Self {
        Self { sum: zero, carry: zero }
    }

    pub(crate) fn add(&mut self, x: T) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub(crate) fn value(&self) -> T {
        self.sum
    }
}

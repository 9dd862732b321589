//! Scenario description and closed-form ground-truth attitude trajectories.
//!
//! Every rotation has a fixed axis, so the rotation angle is integrated
//! analytically and the truth carries no discretisation error. Attitude of
//! sample `k` at `t = k / sample_rate` is
//! `c_bn(t) = c_bn(t_start) * exp(axis * angle(t - t_start))` inside a
//! rotation phase and constant (relative to the rotating navigation frame)
//! inside a static phase.

use crate::attitude::{so3_exp, Dcm, EulerAngles, Vec3};
use crate::earth::EarthParams;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("segment {index}: {reason}")]
    InvalidSegment { index: usize, reason: String },
    #[error("segments {0} and {1} overlap or are out of order")]
    Overlap(usize, usize),
    #[error("segment {index} ends at {t_end} s, after the scenario duration {duration} s")]
    OutOfRange { index: usize, t_end: f64, duration: f64 },
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

/// Frame in which a rotation axis is specified.
///
/// A navigation-frame axis is mapped to the body axis it coincides with at the
/// start of the segment; the rotation then stays about that body axis, which
/// is the same physical motion as a constant navigation-frame rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisFrame {
    #[default]
    Body,
    Nav,
}

/// `rate(tau) = bias + amplitude * sin(angular_frequency * tau + phase)` [rad/s].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinusoidRate {
    pub bias: f64,
    pub amplitude: f64,
    pub angular_frequency: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Motion {
    Static,
    ConstRotation { axis: Vec3, rate: f64 },
    VaryingRotation { axis: Vec3, profile: SinusoidRate },
}

impl Motion {
    pub fn is_rotation(&self) -> bool {
        !matches!(self, Motion::Static)
    }

    fn axis(&self) -> Option<Vec3> {
        match self {
            Motion::Static => None,
            Motion::ConstRotation { axis, .. } | Motion::VaryingRotation { axis, .. } => Some(*axis),
        }
    }

    /// Rotation angle and its first three derivatives at `tau` seconds into the segment.
    fn angle_terms(&self, tau: f64) -> [f64; 4] {
        match *self {
            Motion::Static => [0.0; 4],
            Motion::ConstRotation { rate, .. } => [rate * tau, rate, 0.0, 0.0],
            Motion::VaryingRotation { profile: p, .. } => {
                let w = p.angular_frequency;
                let arg = w * tau + p.phase;
                let (s, c) = arg.sin_cos();
                let angle = if w == 0.0 {
                    (p.bias + p.amplitude * p.phase.sin()) * tau
                } else {
                    p.bias * tau + p.amplitude / w * (p.phase.cos() - c)
                };
                [angle, p.bias + p.amplitude * s, p.amplitude * w * c, -p.amplitude * w * w * s]
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub motion: Motion,
    #[serde(default)]
    pub axis_frame: AxisFrame,
    pub t_start: f64,
    pub t_end: f64,
}

impl Segment {
    pub fn rotation(motion: Motion, t_start: f64, t_end: f64) -> Self {
        Self { motion, axis_frame: AxisFrame::Body, t_start, t_end }
    }

    pub fn in_nav_axes(mut self) -> Self {
        self.axis_frame = AxisFrame::Nav;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub earth: EarthParams,
    pub initial_euler: EulerAngles,
    /// Rotation segments in time order; gaps between them are static.
    pub segments: Vec<Segment>,
    /// [Hz]
    pub sample_rate: f64,
    /// [s]
    pub duration: f64,
    /// True gyro bias [rad/s].
    pub true_bg: Vec3,
    /// True accelerometer bias [m/s^2].
    pub true_ba: Vec3,
}

impl Scenario {
    /// Static scenario with no segments.
    pub fn new(earth: EarthParams, initial_euler: EulerAngles, duration: f64) -> Self {
        Self {
            earth,
            initial_euler,
            segments: Vec::new(),
            sample_rate: 100.0,
            duration,
            true_bg: Vec3::zeros(),
            true_ba: Vec3::zeros(),
        }
    }

    pub fn with_segment(mut self, seg: Segment) -> Self {
        self.segments.push(seg);
        self
    }

    pub fn with_biases(mut self, bg: Vec3, ba: Vec3) -> Self {
        self.true_bg = bg;
        self.true_ba = ba;
        self
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(ScenarioError::Invalid(format!("sample rate {} Hz", self.sample_rate)));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(ScenarioError::Invalid(format!("duration {} s", self.duration)));
        }
        let finite = |v: &Vec3| v.iter().all(|x| x.is_finite());
        if !finite(&self.true_bg) || !finite(&self.true_ba) {
            return Err(ScenarioError::Invalid("non-finite bias".into()));
        }
        let mut prev_end = 0.0;
        for (index, s) in self.segments.iter().enumerate() {
            let bad = |reason: &str| ScenarioError::InvalidSegment { index, reason: reason.into() };
            if !(s.t_end > s.t_start) || s.t_start < 0.0 {
                return Err(bad("needs 0 <= t_start < t_end"));
            }
            if let Some(axis) = s.motion.axis() {
                if !((axis.norm() - 1.0).abs() < 1e-12) {
                    return Err(bad("rotation axis must be a unit vector"));
                }
            }
            match s.motion {
                Motion::Static => {}
                Motion::ConstRotation { rate, .. } => {
                    if rate == 0.0 || !rate.is_finite() {
                        return Err(bad("constant rotation needs a non-zero rate"));
                    }
                }
                Motion::VaryingRotation { profile: p, .. } => {
                    let ok = [p.bias, p.amplitude, p.angular_frequency, p.phase].iter().all(|x| x.is_finite());
                    if !ok || p.amplitude == 0.0 || p.angular_frequency == 0.0 {
                        return Err(bad("varying rotation needs finite, non-zero amplitude and frequency"));
                    }
                    if p.bias.abs() <= p.amplitude.abs() {
                        return Err(bad("varying rate must not cross zero (|bias| > |amplitude|)"));
                    }
                }
            }
            if index > 0 && s.t_start < prev_end {
                return Err(ScenarioError::Overlap(index - 1, index));
            }
            if s.t_end > self.duration + 1e-9 {
                return Err(ScenarioError::OutOfRange { index, t_end: s.t_end, duration: self.duration });
            }
            prev_end = s.t_end;
        }
        Ok(())
    }

    pub fn simulator(&self) -> Result<Simulator, ScenarioError> {
        Simulator::new(self.clone())
    }
}

/// One resolved motion phase on the sample grid, `[k_start, k_end)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase {
    pub k_start: usize,
    pub k_end: usize,
    pub motion: Motion,
    /// Rotation axis in body axes (zero for static phases).
    pub axis_b: Vec3,
    pub c_start: Dcm,
    /// Index into `Scenario::segments`, `None` for implicit static gaps.
    pub segment: Option<usize>,
}

impl Phase {
    pub fn is_rotation(&self) -> bool {
        self.motion.is_rotation()
    }

    pub fn len(&self) -> usize {
        self.k_end - self.k_start
    }

    pub fn is_empty(&self) -> bool {
        self.k_end == self.k_start
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthSample {
    pub t: f64,
    pub c_bn: Dcm,
    pub omega_nb_b: Vec3,
    pub omega_nb_dot: Vec3,
    pub omega_nb_ddot: Vec3,
    pub g_b: Vec3,
    pub omega_ie_b: Vec3,
    /// Index of the phase this sample belongs to.
    pub phase: usize,
    pub rotating: bool,
}

/// Deterministic truth generator for a validated scenario.
#[derive(Debug, Clone)]
pub struct Simulator {
    scenario: Scenario,
    phases: Vec<Phase>,
    n_samples: usize,
}

impl Simulator {
    pub fn new(scenario: Scenario) -> Result<Self, ScenarioError> {
        scenario.validate()?;
        let rate = scenario.sample_rate;
        let last = (scenario.duration * rate).round() as usize;
        let snap = |t: f64| ((t * rate).round() as usize).min(last);

        let mut phases = Vec::new();
        let mut c = Dcm::from_euler(scenario.initial_euler);
        let mut k = 0usize;
        let push_static = |phases: &mut Vec<Phase>, from: usize, to: usize, c: Dcm| {
            if to > from {
                phases.push(Phase {
                    k_start: from,
                    k_end: to,
                    motion: Motion::Static,
                    axis_b: Vec3::zeros(),
                    c_start: c,
                    segment: None,
                });
            }
        };
        for (i, seg) in scenario.segments.iter().enumerate() {
            let (ks, ke) = (snap(seg.t_start), snap(seg.t_end));
            if ke <= ks {
                return Err(ScenarioError::InvalidSegment {
                    index: i,
                    reason: "segment shorter than one sample".into(),
                });
            }
            push_static(&mut phases, k, ks, c);
            let axis_b = match (seg.motion.axis(), seg.axis_frame) {
                (None, _) => Vec3::zeros(),
                (Some(a), AxisFrame::Body) => a,
                (Some(a), AxisFrame::Nav) => c.rotate_inv(&a).normalize(),
            };
            phases.push(Phase { k_start: ks, k_end: ke, motion: seg.motion, axis_b, c_start: c, segment: Some(i) });
            let tau = (ke - ks) as f64 / rate;
            c = c * so3_exp(&(axis_b * seg.motion.angle_terms(tau)[0]));
            k = ke;
        }
        // the final phase also owns the last sample
        push_static(&mut phases, k, last + 1, c);
        if let Some(p) = phases.last_mut() {
            if p.k_end < last + 1 {
                p.k_end = last + 1;
            }
        }
        Ok(Self { scenario, phases, n_samples: last + 1 })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn earth(&self) -> &EarthParams {
        &self.scenario.earth
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    pub fn len(&self) -> usize {
        self.n_samples
    }

    pub fn is_empty(&self) -> bool {
        self.n_samples == 0
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.scenario.sample_rate
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 / self.scenario.sample_rate
    }

    /// Times at which the motion switches (starts of every phase but the first).
    pub fn break_times(&self) -> Vec<f64> {
        self.phases.iter().skip(1).map(|p| self.time(p.k_start)).collect()
    }

    /// The phase produced by segment `index` of the scenario.
    pub fn segment_phase(&self, index: usize) -> Option<&Phase> {
        self.phases.iter().find(|p| p.segment == Some(index))
    }

    pub fn phase_of(&self, k: usize) -> usize {
        self.phases.partition_point(|p| p.k_end <= k).min(self.phases.len() - 1)
    }

    /// Ground truth at sample `k`.
    pub fn truth(&self, k: usize) -> TruthSample {
        let pi = self.phase_of(k);
        let p = &self.phases[pi];
        let t = self.time(k);
        let tau = (k - p.k_start) as f64 / self.scenario.sample_rate;
        let [angle, rate, rate_dot, rate_ddot] = p.motion.angle_terms(tau);
        let c_bn = if p.is_rotation() { p.c_start * so3_exp(&(p.axis_b * angle)) } else { p.c_start };
        let earth = &self.scenario.earth;
        TruthSample {
            t,
            c_bn,
            omega_nb_b: p.axis_b * rate,
            omega_nb_dot: p.axis_b * rate_dot,
            omega_nb_ddot: p.axis_b * rate_ddot,
            g_b: c_bn.rotate_inv(&earth.gravity_n()),
            omega_ie_b: c_bn.rotate_inv(&earth.earth_rate_n()),
            phase: pi,
            rotating: p.is_rotation(),
        }
    }

    /// Truth over a sample range, generated lazily.
    pub fn truth_iter(&self, range: std::ops::Range<usize>) -> impl Iterator<Item = TruthSample> + '_ {
        range.map(move |k| self.truth(k))
    }

    /// Attitude of the body relative to the inertial frame frozen at `t = 0`.
    pub fn inertial_attitude(&self, k: usize) -> Dcm {
        self.scenario.earth.nav_to_initial_nav(self.time(k)) * self.truth(k).c_bn
    }
}

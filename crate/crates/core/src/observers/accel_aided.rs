//! Resolving the axial accelerometer-bias ambiguity with a velocity reference.
//!
//! During a pure rotation `f'` is perpendicular to the rotation axis, so the
//! rotation rows `w x ba = w x f + f'` leave the axial component of `ba`
//! free. An accelerated interval with known velocity adds
//! `2 f'.ba = 2 f'.f - rho'`, where `rho = |v' + (2 omega_ie + omega_en) x v - g_n|^2`
//! equals `|f - ba|^2`, and those rows see the axial component whenever `f'`
//! has one.

use super::{FeasiblePair, ObserverError, RotationSample};
use crate::attitude::{skew, solve_spd, Dcm, Mat3, Vec3};
use crate::earth::EarthParams;
use crate::imu::{ImuDerivatives, ImuRecord};
use serde::Serialize;

/// Reference velocity and its first two derivatives, navigation axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VelocityRef {
    pub v: Vec3,
    pub v_dot: Vec3,
    pub v_ddot: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccelStubSample {
    pub rec: ImuRecord,
    pub vel: VelocityRef,
}

/// Desk-scale kinematic stub: the body holds attitude `c_bn` relative to the
/// local-level frame while its velocity oscillates,
/// `v'(t) = a sin(w_s t)`, `v(t) = a (1 - cos(w_s t)) / w_s`.
/// Position change is ignored for gravity and curvature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccelStub {
    pub earth: EarthParams,
    pub c_bn: Dcm,
    /// Acceleration amplitude, navigation axes [m/s^2].
    pub accel_amplitude: Vec3,
    /// [rad/s]
    pub angular_frequency: f64,
    pub bg: Vec3,
    pub ba: Vec3,
}

impl AccelStub {
    pub fn velocity(&self, t: f64) -> (VelocityRef, Vec3) {
        let (a, ws) = (self.accel_amplitude, self.angular_frequency);
        let (s, c) = (ws * t).sin_cos();
        let vel = VelocityRef { v: a * ((1.0 - c) / ws), v_dot: a * s, v_ddot: a * (ws * c) };
        (vel, a * (-ws * ws * s))
    }

    /// Sensor outputs with exact derivatives at time `t`.
    pub fn sample(&self, t: f64) -> AccelStubSample {
        let e = &self.earth;
        let (vel, v3) = self.velocity(t);
        let (s, sd, sdd) = specific_force_n(e, &vel, &v3);
        let wie = e.earth_rate_n();
        let c = &self.c_bn;
        let w_in = wie + e.transport_rate_n(&vel.v);
        let rec = ImuRecord {
            t,
            omega_ib_b: c.rotate_inv(&w_in) + self.bg,
            f_b: c.rotate_inv(&s) + self.ba,
            derivs: Some(ImuDerivatives {
                d1_omega: c.rotate_inv(&e.transport_rate_n(&vel.v_dot)),
                d2_omega: c.rotate_inv(&e.transport_rate_n(&vel.v_ddot)),
                d1_f: c.rotate_inv(&sd),
                d2_f: c.rotate_inv(&sdd),
            }),
        };
        AccelStubSample { rec, vel }
    }
}

/// `s = v' + (2 omega_ie + omega_en) x v - g_n` and its first two derivatives;
/// `v3` is the third derivative of velocity.
fn specific_force_n(e: &EarthParams, vel: &VelocityRef, v3: &Vec3) -> (Vec3, Vec3, Vec3) {
    let wie2 = e.earth_rate_n() * 2.0;
    let (v, v1, v2) = (vel.v, vel.v_dot, vel.v_ddot);
    let wen = |x: &Vec3| e.transport_rate_n(x);
    let s = v1 + (wie2 + wen(&v)).cross(&v) - e.gravity_n();
    let sd = v2 + (wie2 + wen(&v)).cross(&v1) + wen(&v1).cross(&v);
    let sdd = v3 + (wie2 + wen(&v)).cross(&v2) + wen(&v1).cross(&v1) * 2.0 + wen(&v2).cross(&v);
    (s, sd, sdd)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AidedResolution {
    pub ba: Vec3,
    /// Gyro bias of the feasible pair whose accelerometer bias matches; `None`
    /// when the pairs share the same accelerometer bias.
    pub bg: Option<Vec3>,
    pub pair_index: Option<usize>,
}

/// Unique accelerometer bias from a rotation segment plus an accelerated
/// interval, then the matching feasible pair.
pub fn accel_aided_resolve(
    rotation: &[RotationSample],
    accel: &[AccelStubSample],
    pairs: &[FeasiblePair],
    earth: &EarthParams,
) -> Result<AidedResolution, ObserverError> {
    let mut n = Mat3::zeros();
    let mut rhs = Vec3::zeros();
    let mut axis = Vec3::zeros();
    for s in rotation {
        let w = s.omega_nb;
        let scale = 1.0 / w.norm_squared();
        let k = skew(&w);
        n += k.tr_mul(&k) * scale;
        rhs += k.tr_mul(&(w.cross(&s.rec.f_b) + s.d.d1_f)) * scale;
        axis += w;
    }
    if axis.norm() == 0.0 {
        return Err(ObserverError::NoAxialInformation);
    }
    let axis = axis.normalize();
    let mut axial = 0.0;
    let mut total = 0.0;
    for a in accel {
        let Some(d) = a.rec.derivs else { return Err(ObserverError::MissingDerivatives(a.rec.t)) };
        let fd = d.d1_f;
        let (s, sd, _) = specific_force_n(earth, &a.vel, &Vec3::zeros());
        let rho_dot = 2.0 * s.dot(&sd);
        let m2 = fd.norm_squared();
        total += m2;
        if m2 == 0.0 {
            continue;
        }
        let scale = 1.0 / m2;
        // row 2 f'^T, right-hand side 2 f'.f - rho'
        let row = fd * 2.0;
        n += row * row.transpose() * scale;
        rhs += row * ((2.0 * fd.dot(&a.rec.f_b) - rho_dot) * scale);
        axial += fd.dot(&axis).powi(2);
    }
    if total == 0.0 || axial <= 1e-12 * total {
        return Err(ObserverError::NoAxialInformation);
    }
    let ba = solve_spd(&n, &rhs, 1e-12).ok_or(ObserverError::NoAxialInformation)?;

    let distinct_a = pairs.windows(2).any(|w| (w[0].ba - w[1].ba).norm() > 1e-6 * earth.g);
    let (bg, pair_index) = if distinct_a {
        let (i, p) = pairs
            .iter()
            .enumerate()
            .min_by(|x, y| (x.1.ba - ba).norm().total_cmp(&(y.1.ba - ba).norm()))
            .expect("non-empty pairs");
        (Some(p.bg), Some(i))
    } else if pairs.len() == 1 {
        (Some(pairs[0].bg), Some(0))
    } else {
        (None, None)
    };
    Ok(AidedResolution { ba, bg, pair_index })
}

//! Initial attitude from a bias hypothesis over a window starting at t = 0.

use super::{trapezoid, ObserverError, ObserverTolerances};
use crate::attitude::{skew, so3_exp, solve_spd, Dcm, Mat3, Vec3};
use crate::earth::EarthParams;
use crate::imu::ImuRecord;
use crate::strapdown::RateIncrements;
use nalgebra::SymmetricEigen;

/// Integrates body attitude relative to the inertial frame fixed to the body
/// at the first record, `c_{b(t) -> b(0)}`, from bias-corrected gyro output.
/// `breaks` are the known rate-switch times (see [`RateIncrements`]).
#[derive(Debug, Clone)]
pub struct BodyAttitudeIntegrator {
    bg: Vec3,
    c: Dcm,
    inc: RateIncrements,
    steps: usize,
}

impl BodyAttitudeIntegrator {
    pub fn new(bg: Vec3) -> Self {
        Self::with_breaks(bg, &[])
    }

    pub fn with_breaks(bg: Vec3, breaks: &[f64]) -> Self {
        Self { bg, c: Dcm::identity(), inc: RateIncrements::new(breaks), steps: 0 }
    }

    /// Advances to `rec` and returns `c_{b(t) -> b(0)}` at its time.
    pub fn step(&mut self, rec: &ImuRecord) -> Dcm {
        if let Some(d) = self.inc.push(rec.t, rec.omega_ib_b - self.bg) {
            self.c = self.c * so3_exp(&d);
            self.steps += 1;
            if self.steps % 1000 == 0 {
                self.c = self.c.renormalized();
            }
        }
        self.c
    }
}

/// Attitude `c_bn(0)` from gravity seen in two inertial frames.
///
/// With `u(t) = c_{b(t)->b(0)} (ba - f)` and `w(t) = c_{n(t)->n(0)} g_n`, the
/// attitude satisfies `c_bn(0) u(t) = w(t)` for all t. The rotation is found
/// by orthogonal Procrustes on the trapezoid-weighted moments, which is the
/// SO(3)-constrained form of the normal-equation solve. Records must start at
/// t = 0 (the frozen inertial frame is the navigation frame at that time);
/// `breaks` lists the rate-switch times inside the window.
pub fn initial_attitude_lsq(
    records: &[ImuRecord],
    breaks: &[f64],
    bg: &Vec3,
    ba: &Vec3,
    earth: &EarthParams,
    tol: &ObserverTolerances,
) -> Result<Dcm, ObserverError> {
    if records.len() < 2 {
        return Err(ObserverError::TooFewSamples { needed: 2, got: records.len() });
    }
    let n = records.len();
    let t0 = records[0].t;
    let gn = earth.gravity_n();
    let mut integ = BodyAttitudeIntegrator::with_breaks(*bg, breaks);
    let uw: Vec<(Vec3, Vec3)> = records
        .iter()
        .map(|r| {
            let u = integ.step(r).rotate(&(ba - r.f_b));
            (u, earth.nav_to_initial_nav(r.t - t0).rotate(&gn))
        })
        .collect();
    // Two passes: the attitude information sits in the small spread of the
    // vectors about their mean, which a direct sum of outer products would
    // bury in rounding.
    let total: f64 = (0..n).map(|i| trapezoid(n, i)).sum();
    let u_mean = uw.iter().enumerate().map(|(i, p)| p.0 * trapezoid(n, i)).sum::<Vec3>() / total;
    let w_mean = uw.iter().enumerate().map(|(i, p)| p.1 * trapezoid(n, i)).sum::<Vec3>() / total;
    let mut moment = Mat3::zeros();
    let mut gram = Mat3::zeros();
    for (i, (u, w)) in uw.iter().enumerate() {
        let wt = trapezoid(n, i);
        let (du, dw) = (u - u_mean, w - w_mean);
        moment += dw * du.transpose() * wt;
        gram += dw * dw.transpose() * wt;
    }
    moment += w_mean * u_mean.transpose() * total;
    gram += w_mean * w_mean.transpose() * total;
    let mut ev: Vec<f64> = SymmetricEigen::new(gram).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    let ratio = if ev[1] > 0.0 { ev[0] / ev[1] } else { f64::INFINITY };
    if ratio > tol.cone_ratio {
        return Err(ObserverError::IllConditionedGram(ratio));
    }
    // orthogonal Procrustes: maximise tr(C^T sum w u^T), then polish with
    // Gauss-Newton steps on per-sample residuals, which keeps full precision
    // in the weakly observed rotation about the mean gravity direction
    let mut c = Dcm::nearest(&moment);
    for _ in 0..3 {
        let mut h = Mat3::zeros();
        let mut grad = Vec3::zeros();
        for (i, (u, w)) in uw.iter().enumerate() {
            let v = c.rotate(u);
            let k = skew(&v);
            let wt = trapezoid(n, i);
            h += k.tr_mul(&k) * wt;
            grad += k.tr_mul(&(w - v)) * wt;
        }
        let Some(phi) = solve_spd(&h, &(-grad), 0.0) else { break };
        c = (so3_exp(&phi) * c).renormalized();
        if phi.norm() < 1e-15 {
            break;
        }
    }
    Ok(c)
}

/// Max over the records of `|c_bn(0) c_{b(t)->b(0)} (f - ba) + c_{n(t)->n(0)} g_n| / g`,
/// the gravity-balance residual of a full attitude-and-bias hypothesis.
pub fn replay_residual(
    records: &[ImuRecord],
    breaks: &[f64],
    c_bn0: &Dcm,
    bg: &Vec3,
    ba: &Vec3,
    earth: &EarthParams,
) -> f64 {
    let t0 = records.first().map_or(0.0, |r| r.t);
    let gn = earth.gravity_n();
    let mut integ = BodyAttitudeIntegrator::with_breaks(*bg, breaks);
    records
        .iter()
        .map(|r| {
            let cb = integ.step(r);
            let lhs = c_bn0.rotate(&cb.rotate(&(r.f_b - ba)));
            (lhs + earth.nav_to_initial_nav(r.t - t0).rotate(&gn)).norm() / earth.g
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attitude::EulerAngles;
    use crate::scenario::{Motion, Scenario, Segment};

    fn earth() -> EarthParams {
        EarthParams::from_degrees(28.2204, 60.0).unwrap()
    }

    #[test]
    fn static_window_recovers_attitude() {
        let e = EulerAngles::from_degrees(20.0, 30.0, 10.0);
        let bg = Vec3::repeat(1e-7);
        let ba = Vec3::repeat(5e-4);
        let sim = Scenario::new(earth(), e, 300.0).with_biases(bg, ba).simulator().unwrap();
        let recs = sim.imu_range(0..sim.len());
        let c = initial_attitude_lsq(&recs, &[], &bg, &ba, &earth(), &ObserverTolerances::default()).unwrap();
        let err = c.angle_to(&Dcm::from_euler(e));
        assert!(err < 1e-9, "{err:e}");
        assert!(replay_residual(&recs, &[], &c, &bg, &ba, &earth()) < 1e-10);
    }

    #[test]
    fn integrator_tracks_rotation() {
        let seg = Segment::rotation(Motion::ConstRotation { axis: Vec3::x(), rate: 0.2 }, 10.0, 90.0);
        let sim = Scenario::new(earth(), EulerAngles::from_degrees(5.0, 10.0, 15.0), 100.0)
            .with_segment(seg)
            .simulator()
            .unwrap();
        let mut integ = BodyAttitudeIntegrator::with_breaks(Vec3::zeros(), &[10.0, 90.0]);
        let mut worst: f64 = 0.0;
        for k in 0..sim.len() {
            let cb = integ.step(&sim.imu(k));
            // truth: c_{b(t)->b(0)} = c_bn(0)^T c_{n(t)->n(0)} c_bn(t)
            let truth = sim.truth(0).c_bn.transpose() * sim.inertial_attitude(k);
            worst = worst.max(cb.angle_to(&truth));
        }
        assert!(worst < 1e-9, "{worst:e}");
    }

    #[test]
    fn two_sample_window_is_ill_conditioned() {
        let sim = Scenario::new(earth(), EulerAngles::default(), 1.0).simulator().unwrap();
        let recs = sim.imu_range(0..2);
        assert!(matches!(
            initial_attitude_lsq(&recs, &[], &Vec3::zeros(), &Vec3::zeros(), &earth(), &ObserverTolerances::default()),
            Err(ObserverError::IllConditionedGram(_))
        ));
    }
}

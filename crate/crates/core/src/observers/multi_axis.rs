//! Unique biases from two or more rotation segments about independent axes.

use super::{initial_attitude_lsq, ObserverError, ObserverTolerances, RotationSample};
use crate::attitude::{constant_vector_from_cross, has_two_directions, AttitudeError, Dcm, Vec3};
use crate::earth::EarthParams;
use crate::imu::ImuRecord;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiAxisSolution {
    pub bg: Vec3,
    pub ba: Vec3,
    pub c_bn0: Dcm,
    /// Mean rotation axis of each segment, body axes.
    pub axes: Vec<Vec3>,
}

/// Stacks `w x bg = omega_ib' - w' + w x omega_ib` and `w x ba = f' + w x f`
/// over all segments and solves both in least squares, then recovers the
/// initial attitude over `window` (records from t = 0).
pub fn multi_axis_solve(
    segments: &[Vec<RotationSample>],
    window: &[ImuRecord],
    breaks: &[f64],
    earth: &EarthParams,
    tol: &ObserverTolerances,
) -> Result<MultiAxisSolution, ObserverError> {
    let axes: Vec<Vec3> = segments
        .iter()
        .filter(|s| !s.is_empty())
        .map(|s| s.iter().map(|x| x.omega_nb).sum::<Vec3>().normalize())
        .collect();
    if !has_two_directions(axes.iter(), 1e-6) {
        return Err(ObserverError::DependentAxes);
    }
    let mut rows_g = Vec::new();
    let mut rows_a = Vec::new();
    for s in segments.iter().flatten() {
        let w = s.omega_nb;
        rows_g.push((w, s.d.d1_omega - s.omega_nb_dot + w.cross(&s.rec.omega_ib_b)));
        rows_a.push((w, s.d.d1_f + w.cross(&s.rec.f_b)));
    }
    let map = |e: AttitudeError| match e {
        AttitudeError::ConstantDirection => ObserverError::DependentAxes,
        other => other.into(),
    };
    let bg = constant_vector_from_cross(&rows_g).map_err(map)?;
    let ba = constant_vector_from_cross(&rows_a).map_err(map)?;
    let c_bn0 = initial_attitude_lsq(window, breaks, &bg, &ba, earth, tol)?;
    Ok(MultiAxisSolution { bg, ba, c_bn0, axes })
}

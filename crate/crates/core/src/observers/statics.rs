//! Static-interval constraints and the multiposition solve.

use super::ObserverError;
use crate::attitude::{attitude_from_vector_pairs, point_from_spheres, Dcm, Vec3};
use crate::earth::EarthParams;
use crate::imu::ImuRecord;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// Residuals of the three static constraints for a bias hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StaticResiduals {
    /// `|omega_ib - bg| - Omega` [rad/s]
    pub gyro_norm: f64,
    /// `|f - ba| - g` [m/s^2]
    pub accel_norm: f64,
    /// `(omega_ib - bg).(f - ba) - g Omega sin L` [rad m/s^3]
    pub dot: f64,
}

impl StaticResiduals {
    /// Residuals scaled by Omega, g and g Omega respectively.
    pub fn relative(&self, earth: &EarthParams) -> [f64; 3] {
        [self.gyro_norm / earth.omega, self.accel_norm / earth.g, self.dot / (earth.g * earth.omega)]
    }

    pub fn max_relative(&self, earth: &EarthParams) -> f64 {
        self.relative(earth).iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

pub fn static_constraint_residuals(rec: &ImuRecord, bg: &Vec3, ba: &Vec3, earth: &EarthParams) -> StaticResiduals {
    let w = rec.omega_ib_b - bg;
    let f = rec.f_b - ba;
    StaticResiduals {
        gyro_norm: w.norm() - earth.omega,
        accel_norm: f.norm() - earth.g,
        dot: w.dot(&f) - earth.g_omega_sin_lat(),
    }
}

/// Averaged sensor outputs over one still posture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StaticPosture {
    pub omega: Vec3,
    pub f: Vec3,
}

impl StaticPosture {
    pub fn average(records: &[ImuRecord]) -> Option<Self> {
        if records.is_empty() {
            return None;
        }
        let n = records.len() as f64;
        Some(Self {
            omega: records.iter().map(|r| r.omega_ib_b).sum::<Vec3>() / n,
            f: records.iter().map(|r| r.f_b).sum::<Vec3>() / n,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultipositionSolution {
    pub bg: Vec3,
    pub ba: Vec3,
    /// Attitude of the first posture.
    pub c_bn0: Dcm,
}

/// Biases and first-posture attitude from four or more still postures.
///
/// The gyro bias is the centre of the spheres of radius Omega through the
/// averaged gyro outputs. The accelerometer bias then follows from the linear
/// rows `(omega_k - bg).ba = (omega_k - bg).f_k - g Omega sin L` together with
/// the sphere-difference rows of `|f_k - ba| = g`. If the gyro points are
/// coplanar the roles are swapped and the accelerometer spheres go first.
pub fn multiposition_solve(
    postures: &[StaticPosture],
    earth: &EarthParams,
) -> Result<MultipositionSolution, ObserverError> {
    if postures.len() < 4 {
        return Err(ObserverError::CoplanarPositions);
    }
    let omegas: Vec<Vec3> = postures.iter().map(|p| p.omega).collect();
    let forces: Vec<Vec3> = postures.iter().map(|p| p.f).collect();
    let c = earth.g_omega_sin_lat();

    let (bg, ba) = if let Some(bg) = point_from_spheres(&omegas, earth.omega)?.point() {
        let ba = linear_partner(&forces, &omegas, &bg, earth.g, c).ok_or(ObserverError::CoplanarPositions)?;
        (bg, ba)
    } else if let Some(ba) = point_from_spheres(&forces, earth.g)?.point() {
        let bg = linear_partner(&omegas, &forces, &ba, earth.omega, c).ok_or(ObserverError::CoplanarPositions)?;
        (bg, ba)
    } else {
        return Err(ObserverError::CoplanarPositions);
    };

    let first = postures[0];
    let up = -earth.gravity_n() / earth.g;
    let wie = earth.earth_rate_n() / earth.omega;
    let f_b = (first.f - ba) / earth.g;
    let w_b = (first.omega - bg) / earth.omega;
    let c_bn0 = attitude_from_vector_pairs(&[(f_b, up), (w_b, wie), (f_b.cross(&w_b), up.cross(&wie))])?;
    Ok(MultipositionSolution { bg, ba, c_bn0 })
}

/// Solves for `x` from `(y_k - y_known).x = (y_k - y_known).x_k - c` and the
/// sphere differences `2 (x_k - x_1).x = |x_k|^2 - |x_1|^2` (each row scaled to
/// unit norm). `None` when the stack has rank below three.
fn linear_partner(xs: &[Vec3], ys: &[Vec3], y_known: &Vec3, x_radius: f64, c: f64) -> Option<Vec3> {
    let mut rows: Vec<(Vec3, f64)> = Vec::new();
    for (x, y) in xs.iter().zip(ys) {
        let d = y - y_known;
        let n = d.norm();
        if n > 0.0 {
            rows.push((d / n, (d.dot(x) - c) / n));
        }
    }
    let x1 = xs[0];
    for x in &xs[1..] {
        let d = (x - x1) * 2.0;
        let n = d.norm();
        if n > 1e-12 * x_radius {
            rows.push((d / n, (x.norm_squared() - x1.norm_squared()) / n));
        }
    }
    let a = DMatrix::from_fn(rows.len(), 3, |i, j| rows[i].0[j]);
    let b = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= 1e-8 * smax {
        return None;
    }
    let sol = svd.solve(&b, 0.0).ok()?;
    Some(Vec3::new(sol[0], sol[1], sol[2]))
}

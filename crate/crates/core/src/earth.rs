//! Earth rate, normal gravity and curvature radii at a fixed known location.
//!
//! Navigation-frame vectors use the (North, Up, East) axis order throughout.

use crate::attitude::{so3_exp, Dcm, Vec3};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

/// WGS-84 constants.
pub mod wgs84 {
    /// Earth rotation rate [rad/s].
    pub const OMEGA: f64 = 7.292_115_146_7e-5;
    /// Semi-major axis [m].
    pub const A: f64 = 6_378_137.0;
    /// First eccentricity squared.
    pub const E2: f64 = 6.694_379_990_13e-3;
    /// Normal gravity at the equator [m/s^2].
    pub const GAMMA_E: f64 = 9.780_325_335_9;
    /// Somigliana constant.
    pub const K: f64 = 1.931_852_652_41e-3;
}

/// Free-air gravity gradient [1/s^2].
pub const FREE_AIR_GRADIENT: f64 = 3.086e-6;

/// Standard gravity, used only for micro-g unit conversion.
pub const STANDARD_GRAVITY: f64 = 9.806_65;

pub const NORTH: usize = 0;
pub const UP: usize = 1;
pub const EAST: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EarthError {
    #[error("latitude {0} rad is at or beyond a pole")]
    PolarLatitude(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EarthParams {
    /// Latitude [rad].
    pub latitude: f64,
    /// Altitude [m].
    pub altitude: f64,
    /// Earth rotation rate [rad/s].
    pub omega: f64,
    /// Local gravity magnitude [m/s^2].
    pub g: f64,
    /// Transverse radius of curvature [m].
    pub r_e: f64,
    /// Meridian radius of curvature [m].
    pub r_n: f64,
}

impl EarthParams {
    pub fn new(latitude: f64, altitude: f64) -> Result<Self, EarthError> {
        if !(latitude.abs() < FRAC_PI_2) {
            return Err(EarthError::PolarLatitude(latitude));
        }
        let (r_e, r_n) = curvature_radii(latitude);
        Ok(Self { latitude, altitude, omega: wgs84::OMEGA, g: gravity_magnitude(latitude, altitude), r_e, r_n })
    }

    pub fn from_degrees(latitude_deg: f64, altitude: f64) -> Result<Self, EarthError> {
        Self::new(latitude_deg.to_radians(), altitude)
    }

    /// Earth rate in navigation axes.
    pub fn earth_rate_n(&self) -> Vec3 {
        earth_rate_n(self.omega, self.latitude)
    }

    /// Gravity vector in navigation axes, `(0, -g, 0)`.
    pub fn gravity_n(&self) -> Vec3 {
        Vec3::new(0.0, -self.g, 0.0)
    }

    /// `g * Omega * sin L`, the static dot-product constraint value.
    pub fn g_omega_sin_lat(&self) -> f64 {
        self.g * self.omega * self.latitude.sin()
    }

    /// Rotation taking navigation axes at time `t` to the (inertial) navigation
    /// axes frozen at time zero, for a stationary location.
    pub fn nav_to_initial_nav(&self, t: f64) -> Dcm {
        so3_exp(&(self.earth_rate_n() * t))
    }

    /// Transport rate of the local-level frame for ground velocity `v_n`.
    pub fn transport_rate_n(&self, v_n: &Vec3) -> Vec3 {
        let (vn, ve) = (v_n[NORTH], v_n[EAST]);
        let re = self.r_e + self.altitude;
        let rn = self.r_n + self.altitude;
        Vec3::new(ve / re, ve * self.latitude.tan() / re, -vn / rn)
    }
}

/// `(Omega cos L, Omega sin L, 0)`.
pub fn earth_rate_n(omega: f64, latitude: f64) -> Vec3 {
    Vec3::new(omega * latitude.cos(), omega * latitude.sin(), 0.0)
}

/// Somigliana normal gravity with a linear free-air correction.
pub fn gravity_magnitude(latitude: f64, altitude: f64) -> f64 {
    let s2 = latitude.sin().powi(2);
    let g0 = wgs84::GAMMA_E * (1.0 + wgs84::K * s2) / (1.0 - wgs84::E2 * s2).sqrt();
    g0 - FREE_AIR_GRADIENT * altitude
}

/// Transverse (prime vertical) and meridian radii of curvature.
pub fn curvature_radii(latitude: f64) -> (f64, f64) {
    let w2 = 1.0 - wgs84::E2 * latitude.sin().powi(2);
    let r_e = wgs84::A / w2.sqrt();
    let r_n = wgs84::A * (1.0 - wgs84::E2) / (w2 * w2.sqrt());
    (r_e, r_n)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SITE_LAT_DEG: f64 = 28.2204;

    #[test]
    fn earth_rate_axes() {
        let w = wgs84::OMEGA;
        assert_eq!(earth_rate_n(w, 0.0), Vec3::new(w, 0.0, 0.0));
        let pole = earth_rate_n(w, FRAC_PI_2);
        assert!(pole.x.abs() < 1e-20 && pole.y == w);
        let l = SITE_LAT_DEG.to_radians();
        let e = earth_rate_n(w, l);
        assert!((e.norm() - w).abs() < 1e-20);
        assert_eq!(e[UP], w * l.sin());
    }

    #[test]
    fn gravity_values() {
        let g = gravity_magnitude(SITE_LAT_DEG.to_radians(), 60.0);
        assert!((2.0 * g - 19.5834).abs() < 5e-4, "2g = {}", 2.0 * g);
        let dg = gravity_magnitude(0.5, 0.0) - gravity_magnitude(0.5, 1000.0);
        assert!((dg - 3.086e-3).abs() < 1e-12);
        assert!((gravity_magnitude(0.0, 0.0) - 9.7803).abs() < 2e-4);
    }

    #[test]
    fn gravity_monotone() {
        let mut prev = gravity_magnitude(0.0, 10.0);
        for k in 1..90 {
            let g = gravity_magnitude((k as f64).to_radians(), 10.0);
            assert!(g > prev);
            assert_eq!(gravity_magnitude(-(k as f64).to_radians(), 10.0), g);
            prev = g;
        }
        assert!(gravity_magnitude(0.3, 100.0) < gravity_magnitude(0.3, 0.0));
    }

    #[test]
    fn radii() {
        let (re, rn) = curvature_radii(0.0);
        assert_eq!(re, wgs84::A);
        assert!(rn < re);
        let (re, rn) = curvature_radii(0.7);
        assert!(rn < re);
        // independent form: R_N = R_E^3 (1 - e^2) / a^2
        let l = SITE_LAT_DEG.to_radians();
        let (re, rn) = curvature_radii(l);
        let rn_alt = re.powi(3) * (1.0 - wgs84::E2) / (wgs84::A * wgs84::A);
        assert!(((rn - rn_alt) / rn_alt).abs() < 1e-3);
        let re_alt = wgs84::A / (1.0 - wgs84::E2 * l.sin() * l.sin()).sqrt();
        assert!(((re - re_alt) / re_alt).abs() < 1e-3);
    }

    #[test]
    fn rejects_pole() {
        assert!(EarthParams::new(FRAC_PI_2, 0.0).is_err());
        assert!(EarthParams::new(f64::NAN, 0.0).is_err());
        let p = EarthParams::from_degrees(SITE_LAT_DEG, 60.0).unwrap();
        assert!(p.omega > 0.0 && p.g > 0.0);
        assert_eq!(p.transport_rate_n(&Vec3::zeros()), Vec3::zeros());
    }
}

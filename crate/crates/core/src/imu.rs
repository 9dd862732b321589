//! Ideal IMU outputs, their time derivatives, sensor noise and CSV export.

use crate::attitude::Vec3;
use crate::scenario::{Simulator, TruthSample};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::io::{self, Write};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ImuError {
    #[error("derivatives requested at t = {0} s, outside any rotation segment")]
    OutsideRotation(f64),
    #[error("segment has {len} samples, stencil needs at least {needed}")]
    SegmentTooShort { len: usize, needed: usize },
    #[error("stencil half-width must be at least 1")]
    BadStencil,
    #[error("constant-rotation derivative identity violated by {0:e}")]
    SelfCheck(f64),
}

/// First and second time derivatives of the gyro and accelerometer outputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImuDerivatives {
    pub d1_omega: Vec3,
    pub d2_omega: Vec3,
    pub d1_f: Vec3,
    pub d2_f: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImuRecord {
    pub t: f64,
    /// Gyro output [rad/s].
    pub omega_ib_b: Vec3,
    /// Accelerometer output [m/s^2].
    pub f_b: Vec3,
    pub derivs: Option<ImuDerivatives>,
}

/// Sensor outputs for one truth sample.
///
/// The accelerometer senses the reaction to gravity, `f = -g_b + ba`.
pub fn emit_imu(truth: &TruthSample, true_bg: &Vec3, true_ba: &Vec3) -> ImuRecord {
    ImuRecord {
        t: truth.t,
        omega_ib_b: truth.omega_nb_b + truth.omega_ie_b + true_bg,
        f_b: -truth.g_b + true_ba,
        derivs: None,
    }
}

/// Exact output derivatives inside a rotation segment.
///
/// With `w = omega_nb` and `c_bn' = c_bn skew(w)`, body-frame images of fixed
/// navigation vectors evolve as `x' = -w x x`, which gives
/// `omega_ib' = w' - w x omega_ie_b` and `f' = w x g_b`.
pub fn analytic_derivatives(truth: &TruthSample, rec: &ImuRecord) -> Result<ImuRecord, ImuError> {
    if !truth.rotating {
        return Err(ImuError::OutsideRotation(truth.t));
    }
    let w = truth.omega_nb_b;
    let wd = truth.omega_nb_dot;
    let wdd = truth.omega_nb_ddot;
    let wie = truth.omega_ie_b;
    let g = truth.g_b;

    let d1_omega = wd - w.cross(&wie);
    let d2_omega = wdd - wd.cross(&wie) + w.cross(&w.cross(&wie));
    let d1_f = w.cross(&g);
    let d2_f = wd.cross(&g) - w.cross(&w.cross(&g));

    if wd == Vec3::zeros() && wdd == Vec3::zeros() {
        let w2 = w.norm_squared();
        let r_omega = (d1_omega.cross(&w) - d2_omega).norm() / (w2 * wie.norm()).max(f64::MIN_POSITIVE);
        let r_f = (d1_f.cross(&w) - d2_f).norm() / (w2 * g.norm()).max(f64::MIN_POSITIVE);
        let r = r_omega.max(r_f);
        if r > 1e-12 {
            return Err(ImuError::SelfCheck(r));
        }
    }
    Ok(ImuRecord { derivs: Some(ImuDerivatives { d1_omega, d2_omega, d1_f, d2_f }), ..*rec })
}

impl Simulator {
    /// Noiseless IMU record at sample `k`.
    pub fn imu(&self, k: usize) -> ImuRecord {
        let sc = self.scenario();
        emit_imu(&self.truth(k), &sc.true_bg, &sc.true_ba)
    }

    /// Noiseless IMU record with analytic derivatives.
    pub fn imu_with_derivatives(&self, k: usize) -> Result<ImuRecord, ImuError> {
        let sc = self.scenario();
        let tr = self.truth(k);
        analytic_derivatives(&tr, &emit_imu(&tr, &sc.true_bg, &sc.true_ba))
    }

    /// Records over a sample range, without derivatives.
    pub fn imu_range(&self, range: std::ops::Range<usize>) -> Vec<ImuRecord> {
        range.map(|k| self.imu(k)).collect()
    }

    /// Records over a sample range inside one rotation phase, with analytic derivatives.
    pub fn imu_range_with_derivatives(&self, range: std::ops::Range<usize>) -> Result<Vec<ImuRecord>, ImuError> {
        range.map(|k| self.imu_with_derivatives(k)).collect()
    }
}

/// Central-difference weights for derivative order `order` on the stencil `-p..=p`.
///
/// Solves the Vandermonde moment conditions `sum_j w_j j^m = m! [m == order]`.
pub fn central_weights(p: usize, order: usize) -> Vec<f64> {
    let n = 2 * p + 1;
    let offsets: Vec<f64> = (0..n).map(|i| i as f64 - p as f64).collect();
    let v = DMatrix::from_fn(n, n, |m, j| offsets[j].powi(m as i32));
    let mut rhs = DVector::zeros(n);
    rhs[order] = (1..=order).map(|x| x as f64).product();
    let w = v.lu().solve(&rhs).expect("Vandermonde matrix with distinct nodes is invertible");
    w.iter().copied().collect()
}

/// Fills derivatives by central finite differences of half-width `p`.
///
/// The first and last `p` records keep `derivs = None`. Records must be
/// uniformly spaced by `dt` and belong to one segment.
pub fn finite_diff_derivatives(records: &[ImuRecord], p: usize, dt: f64) -> Result<Vec<ImuRecord>, ImuError> {
    if p == 0 {
        return Err(ImuError::BadStencil);
    }
    let needed = 2 * p + 1;
    if records.len() < needed {
        return Err(ImuError::SegmentTooShort { len: records.len(), needed });
    }
    let w1 = central_weights(p, 1);
    let w2 = central_weights(p, 2);
    let apply = |k: usize, w: &[f64], get: fn(&ImuRecord) -> Vec3| -> Vec3 {
        w.iter().enumerate().map(|(j, wj)| get(&records[k + j - p]) * *wj).sum()
    };
    let omega = |r: &ImuRecord| r.omega_ib_b;
    let force = |r: &ImuRecord| r.f_b;
    let mut out = records.to_vec();
    for (k, rec) in out.iter_mut().enumerate() {
        rec.derivs = if k < p || k + p >= records.len() {
            None
        } else {
            Some(ImuDerivatives {
                d1_omega: apply(k, &w1, omega) / dt,
                d2_omega: apply(k, &w2, omega) / (dt * dt),
                d1_f: apply(k, &w1, force) / dt,
                d2_f: apply(k, &w2, force) / (dt * dt),
            })
        };
    }
    Ok(out)
}

/// White sensor noise with densities `sigma_g` [rad/s/sqrt(Hz)] and
/// `sigma_a` [m/s^2/sqrt(Hz)].
///
/// Each sample index draws from its own ChaCha stream, so the noise on sample
/// `k` does not depend on which other samples are generated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub sigma_g: f64,
    pub sigma_a: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn is_zero(&self) -> bool {
        self.sigma_g == 0.0 && self.sigma_a == 0.0
    }

    /// Adds noise for sample index `k` at sample rate `rate` [Hz].
    pub fn apply(&self, k: usize, rate: f64, rec: &mut ImuRecord) {
        if self.is_zero() {
            return;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(k as u64);
        let scale = rate.sqrt();
        let mut draw = || -> Vec3 { Vec3::from_fn(|_, _| StandardNormal.sample(&mut rng)) };
        rec.omega_ib_b += draw() * (self.sigma_g * scale);
        rec.f_b += draw() * (self.sigma_a * scale);
    }
}

/// Adds seeded white noise to a stream whose first record is sample `k0`.
///
/// Derivatives already present are left untouched; recompute them with
/// [`finite_diff_derivatives`] when they should see the noise.
pub fn add_noise(records: &[ImuRecord], k0: usize, rate: f64, noise: &NoiseModel) -> Vec<ImuRecord> {
    records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut r = *r;
            noise.apply(k0 + i, rate, &mut r);
            r
        })
        .collect()
}

/// Writes `t, wx, wy, wz, fx, fy, fz` and, when every record carries
/// derivatives, the twelve derivative columns.
pub fn write_csv<W: Write>(mut w: W, records: &[ImuRecord]) -> io::Result<()> {
    let with_d = !records.is_empty() && records.iter().all(|r| r.derivs.is_some());
    write!(w, "t,wx,wy,wz,fx,fy,fz")?;
    if with_d {
        write!(w, ",dwx,dwy,dwz,ddwx,ddwy,ddwz,dfx,dfy,dfz,ddfx,ddfy,ddfz")?;
    }
    writeln!(w)?;
    for r in records {
        write!(w, "{}", r.t)?;
        for v in [r.omega_ib_b, r.f_b] {
            write!(w, ",{:e},{:e},{:e}", v.x, v.y, v.z)?;
        }
        if let (true, Some(d)) = (with_d, r.derivs) {
            for v in [d.d1_omega, d.d2_omega, d.d1_f, d.d2_f] {
                write!(w, ",{:e},{:e},{:e}", v.x, v.y, v.z)?;
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

//! Coarse alignment plus a 12-state error-state Kalman filter with
//! zero-velocity measurements.
//!
//! Error state `x = (phi, dv, dbg, dba)`: the attitude error is defined by
//! `C_hat = (I - [phi x]) C`, `dv = v_hat - v`, and the bias errors are
//! `b - b_hat`, so a filter correction is added to the bias estimates. The
//! filter runs closed loop: every update is folded back into the nominal
//! state and the error mean is reset to zero.

use crate::attitude::{attitude_from_vector_pairs, skew, so3_exp, AttitudeError, Dcm, Mat3, Vec3};
use crate::earth::EarthParams;
use crate::imu::ImuRecord;
use crate::strapdown::RateIncrements;
use nalgebra::{SMatrix, SVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::io::{self, Write};
use thiserror::Error;

pub type Mat12 = SMatrix<f64, 12, 12>;
pub type Vec12 = SVector<f64, 12>;

const DEG_H: f64 = std::f64::consts::PI / 180.0 / 3600.0;
const MICRO_G: f64 = 1e-6 * crate::earth::STANDARD_GRAVITY;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EkfError {
    #[error("coarse alignment failed: {0}")]
    Coarse(#[from] AttitudeError),
    #[error("no records inside the {0} s coarse-alignment interval")]
    EmptyCoarseInterval(f64),
    #[error("invalid filter settings: {0}")]
    Settings(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NavState {
    pub c_bn: Dcm,
    pub v_n: Vec3,
    pub bg: Vec3,
    pub ba: Vec3,
}

/// Closed-loop feedback is the only supported mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feedback {
    #[default]
    ClosedLoop,
}

/// Filter tuning. Angles and biases are SI here; configuration files convert.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EkfSettings {
    /// Length of the static coarse-alignment interval [s].
    pub coarse_duration: f64,
    /// 1-sigma per-axis attitude perturbation added after coarse alignment [rad].
    pub init_attitude_sigma: f64,
    /// Initial 1-sigma of the velocity error [m/s].
    pub velocity_sigma: f64,
    /// Initial 1-sigma of the gyro bias error [rad/s].
    pub gyro_bias_sigma: f64,
    /// Initial 1-sigma of the accelerometer bias error [m/s^2].
    pub accel_bias_sigma: f64,
    /// Continuous process noise density per error state.
    pub process_noise: [f64; 12],
    /// Zero-velocity measurement 1-sigma [m/s].
    pub measurement_sigma: f64,
    /// Zero-velocity updates per second.
    pub measurement_rate: f64,
    /// Initial bias estimates.
    pub initial_bg: Vec3,
    pub initial_ba: Vec3,
    pub feedback: Feedback,
    /// Covariance reset on grossly inconsistent innovations (`None` disables).
    pub reset: Option<CovarianceReset>,
}

/// When the normalized innovation squared of a zero-velocity update exceeds
/// `nis_threshold`, the covariance is reopened to these 1-sigmas before the
/// update. The state estimate is kept. This lets the filter leave a solution
/// that stops fitting the measurements once a new motion starts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceReset {
    pub nis_threshold: f64,
    /// Per-axis attitude 1-sigma [rad].
    pub attitude_sigma: f64,
    /// Gyro bias 1-sigma [rad/s].
    pub gyro_bias_sigma: f64,
    /// Accelerometer bias 1-sigma [m/s^2].
    pub accel_bias_sigma: f64,
}

impl Default for CovarianceReset {
    fn default() -> Self {
        Self {
            nis_threshold: 300.0,
            attitude_sigma: 5f64.to_radians(),
            gyro_bias_sigma: 10.0 * DEG_H,
            accel_bias_sigma: 1.0,
        }
    }
}

impl Default for EkfSettings {
    fn default() -> Self {
        Self {
            coarse_duration: 20.0,
            init_attitude_sigma: 1f64.to_radians(),
            velocity_sigma: 0.1,
            gyro_bias_sigma: 0.5 * DEG_H,
            accel_bias_sigma: 100.0 * MICRO_G,
            process_noise: [
                1e-16, 1e-16, 1e-16, // attitude [rad^2/s]
                1e-16, 1e-16, 1e-16, // velocity [m^2/s^3]
                1e-24, 1e-24, 1e-24, // gyro bias [rad^2/s^3]
                1e-16, 1e-16, 1e-16, // accelerometer bias [m^2/s^5]
            ],
            measurement_sigma: 1e-4,
            measurement_rate: 1.0,
            initial_bg: Vec3::zeros(),
            initial_ba: Vec3::zeros(),
            feedback: Feedback::ClosedLoop,
            reset: Some(CovarianceReset::default()),
        }
    }
}

impl EkfSettings {
    pub fn validate(&self) -> Result<(), EkfError> {
        let nonneg = [
            ("coarse_duration", self.coarse_duration),
            ("init_attitude_sigma", self.init_attitude_sigma),
            ("velocity_sigma", self.velocity_sigma),
            ("gyro_bias_sigma", self.gyro_bias_sigma),
            ("accel_bias_sigma", self.accel_bias_sigma),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(EkfError::Settings(format!("{name} must be a finite non-negative number")));
            }
        }
        if self.process_noise.iter().any(|q| !(*q >= 0.0)) {
            return Err(EkfError::Settings("process noise must be non-negative".into()));
        }
        if let Some(r) = &self.reset {
            let ok = [r.nis_threshold, r.attitude_sigma, r.gyro_bias_sigma, r.accel_bias_sigma]
                .iter()
                .all(|v| *v > 0.0 && v.is_finite());
            if !ok {
                return Err(EkfError::Settings("covariance reset values must be positive".into()));
            }
        }
        if !(self.measurement_sigma > 0.0) || !(self.measurement_rate > 0.0) {
            return Err(EkfError::Settings("measurement sigma and rate must be positive".into()));
        }
        Ok(())
    }

    /// Initial covariance with attitude variance `att_sigma^2`.
    pub fn initial_covariance(&self, att_sigma: f64) -> Mat12 {
        let mut d = Vec12::zeros();
        for i in 0..3 {
            d[i] = att_sigma * att_sigma;
            d[3 + i] = self.velocity_sigma.powi(2);
            d[6 + i] = self.gyro_bias_sigma.powi(2);
            d[9 + i] = self.accel_bias_sigma.powi(2);
        }
        Mat12::from_diagonal(&d)
    }
}

/// Analytic alignment from static averages: gravity and earth rate seen in
/// body axes against their navigation-frame values, then a seeded random
/// rotation with per-axis 1-sigma `perturb_sigma`.
///
/// Gravity fixes the vertical exactly and earth rate only the heading (TRIAD
/// triads fed to the vector-pair solver), so a wrong accelerometer-bias
/// hypothesis shows up as a heading-independent tilt rather than being
/// spread over all three axes.
pub fn coarse_align(
    avg_omega: &Vec3,
    avg_f: &Vec3,
    earth: &EarthParams,
    perturb_sigma: f64,
    seed: u64,
) -> Result<Dcm, EkfError> {
    // gravity in body axes is -f for a static body
    let triad = |down: Vec3, rate: &Vec3| -> Result<[Vec3; 3], AttitudeError> {
        let unit = |v: Vec3| v.try_normalize(1e-300).ok_or(AttitudeError::DegenerateDirections(0.0));
        let a = unit(down)?;
        let b = unit(a.cross(rate))?;
        Ok([a, b, a.cross(&b)])
    };
    let body = triad(-avg_f, avg_omega)?;
    let nav = triad(earth.gravity_n(), &earth.earth_rate_n())?;
    let pairs: Vec<(Vec3, Vec3)> = body.into_iter().zip(nav).collect();
    let c = attitude_from_vector_pairs(&pairs)?;
    Ok(perturb(&c, perturb_sigma, seed))
}

/// `so3_exp(phi) * c` with `phi` drawn per axis from N(0, sigma^2).
pub fn perturb(c: &Dcm, sigma: f64, seed: u64) -> Dcm {
    if sigma == 0.0 {
        return *c;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = Normal::new(0.0, sigma).expect("finite sigma");
    let phi = Vec3::from_fn(|_, _| n.sample(&mut rng));
    so3_exp(&phi) * *c
}

/// One filter instance: nominal state, error covariance and integrator state.
#[derive(Debug, Clone)]
pub struct Ekf {
    pub state: NavState,
    pub p: Mat12,
    /// Number of covariance resets so far.
    pub resets: usize,
    earth: EarthParams,
    settings: EkfSettings,
    inc: RateIncrements,
    // specific force (bias corrected, nav axes) and time of the last record
    last: Option<(f64, Vec3)>,
    steps: usize,
}

impl Ekf {
    pub fn new(state: NavState, p0: Mat12, earth: EarthParams, settings: EkfSettings, breaks: &[f64]) -> Self {
        Self { state, p: p0, resets: 0, earth, settings, inc: RateIncrements::new(breaks), last: None, steps: 0 }
    }

    /// Propagates the nominal state and the covariance to the time of `rec`.
    /// The first record only initializes the integrators.
    pub fn propagate(&mut self, rec: &ImuRecord) {
        let e = self.earth;
        let s = &mut self.state;
        let inc = self.inc.push_with_offset(rec.t, rec.omega_ib_b, &s.bg);
        let Some((t0, a0)) = self.last else {
            self.last = Some((rec.t, s.c_bn.rotate(&(rec.f_b - s.ba))));
            return;
        };
        let dt = rec.t - t0;
        let wie = e.earth_rate_n();
        let w_in = wie + e.transport_rate_n(&s.v_n);
        if let Some(d) = inc {
            s.c_bn = so3_exp(&(-w_in * dt)) * s.c_bn * so3_exp(&d);
        }
        self.steps += 1;
        if self.steps % 1000 == 0 {
            s.c_bn = s.c_bn.renormalized();
        }
        let f_n = s.c_bn.rotate(&(rec.f_b - s.ba));
        let coriolis = (wie * 2.0 + e.transport_rate_n(&s.v_n)).cross(&s.v_n);
        s.v_n += ((a0 + f_n) * 0.5 + e.gravity_n() - coriolis) * dt;
        self.last = Some((rec.t, f_n));

        let blocks = ErrorDynamics::new(&s.c_bn, &f_n, &w_in, &(wie * 2.0 + e.transport_rate_n(&s.v_n)));
        // (I + F dt) P (I + F dt)^T = M + dt (F M^T)^T with M = P + dt F P
        let m = self.p + blocks.apply(&self.p) * dt;
        let mut p = m + blocks.apply(&m.transpose()).transpose() * dt;
        for i in 0..12 {
            p[(i, i)] += self.settings.process_noise[i] * dt;
        }
        self.p = (p + p.transpose()) * 0.5;
    }

    /// Zero-velocity update with closed-loop feedback; returns the innovation.
    pub fn update_zupt(&mut self) -> Vec3 {
        let z = self.state.v_n;
        let r = self.settings.measurement_sigma.powi(2);
        if let Some(reset) = self.settings.reset {
            let s = self.p.fixed_view::<3, 3>(3, 3) + Mat3::identity() * r;
            let nis = s.try_inverse().map_or(f64::INFINITY, |s_inv| z.dot(&(s_inv * z)));
            if nis > reset.nis_threshold {
                let mut wide = self.settings;
                wide.gyro_bias_sigma = reset.gyro_bias_sigma;
                wide.accel_bias_sigma = reset.accel_bias_sigma;
                self.p = wide.initial_covariance(reset.attitude_sigma);
                self.resets += 1;
            }
        }
        let ph: SMatrix<f64, 12, 3> = self.p.fixed_view::<12, 3>(0, 3).into_owned();
        let s = self.p.fixed_view::<3, 3>(3, 3) + Mat3::identity() * r;
        let Some(s_inv) = s.try_inverse() else { return z };
        let k = ph * s_inv;
        let x: Vec12 = k * z;
        let mut ikh = Mat12::identity();
        let mut block = ikh.fixed_view_mut::<12, 3>(0, 3);
        block -= &k;
        let p = ikh * self.p * ikh.transpose() + k * k.transpose() * r;
        self.p = (p + p.transpose()) * 0.5;

        let st = &mut self.state;
        let phi: Vec3 = x.fixed_rows::<3>(0).into_owned();
        st.c_bn = (so3_exp(&phi) * st.c_bn).renormalized();
        st.v_n -= x.fixed_rows::<3>(3);
        st.bg += x.fixed_rows::<3>(6);
        let dba: Vec3 = x.fixed_rows::<3>(9).into_owned();
        st.ba += dba;
        // keep the stored specific force consistent with the corrected state
        if let Some((t, a0)) = self.last {
            self.last = Some((t, so3_exp(&phi).rotate(&a0) - st.c_bn.rotate(&dba)));
        }
        z
    }
}

/// Non-zero 3x3 blocks of the continuous error dynamics `F`.
struct ErrorDynamics {
    // phi row: -[w_in x] phi - C dbg
    att_att: Mat3,
    att_bg: Mat3,
    // dv row: [C f x] phi - [(2 w_ie + w_en) x] dv + C dba
    vel_att: Mat3,
    vel_vel: Mat3,
    vel_ba: Mat3,
}

impl ErrorDynamics {
    fn new(c: &Dcm, f_n: &Vec3, w_in: &Vec3, w_cor: &Vec3) -> Self {
        let cm = *c.matrix();
        Self { att_att: -skew(w_in), att_bg: -cm, vel_att: skew(f_n), vel_vel: -skew(w_cor), vel_ba: cm }
    }

    /// `F * x` for a 12x12 `x`, using only the non-zero blocks.
    fn apply(&self, x: &Mat12) -> Mat12 {
        let row = |i: usize| x.fixed_view::<3, 12>(i, 0);
        let mut out = Mat12::zeros();
        out.fixed_view_mut::<3, 12>(0, 0).copy_from(&(self.att_att * row(0) + self.att_bg * row(6)));
        out.fixed_view_mut::<3, 12>(3, 0)
            .copy_from(&(self.vel_att * row(0) + self.vel_vel * row(3) + self.vel_ba * row(9)));
        out
    }
}

/// How the filter state is initialized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EkfInit {
    /// Coarse alignment over the settings' static interval, perturbed with `seed`.
    Coarse { seed: u64 },
    /// Start at the first record from a given state (e.g. the truth).
    Given(NavState),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistoryRow {
    pub t: f64,
    pub state: NavState,
    pub innovation: Vec3,
    pub p_diag: [f64; 12],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EkfRun {
    pub coarse_attitude: Option<Dcm>,
    pub final_state: NavState,
    pub final_p_diag: [f64; 12],
    pub max_innovation: f64,
    pub resets: usize,
    pub history: Vec<HistoryRow>,
}

/// Coarse phase (unless a state is given), then filtering over the rest of
/// `records` with zero-velocity updates at the configured rate. `breaks`
/// lists known rate-switch times. History rows are taken at every update.
pub fn ekf_run(
    records: &[ImuRecord],
    breaks: &[f64],
    earth: &EarthParams,
    settings: &EkfSettings,
    init: EkfInit,
) -> Result<EkfRun, EkfError> {
    settings.validate()?;
    let t_first = records.first().map_or(0.0, |r| r.t);
    let (state, p0, start, coarse_attitude) = match init {
        EkfInit::Given(s) => (s, settings.initial_covariance(settings.init_attitude_sigma), 0, None),
        EkfInit::Coarse { seed } => {
            let end = t_first + settings.coarse_duration;
            let n = records.iter().take_while(|r| r.t <= end + 1e-9).count();
            if n == 0 {
                return Err(EkfError::EmptyCoarseInterval(settings.coarse_duration));
            }
            let w = records[..n].iter().map(|r| r.omega_ib_b).sum::<Vec3>() / n as f64;
            let f = records[..n].iter().map(|r| r.f_b).sum::<Vec3>() / n as f64;
            let c = coarse_align(
                &(w - settings.initial_bg),
                &(f - settings.initial_ba),
                earth,
                settings.init_attitude_sigma,
                seed,
            )?;
            let state = NavState { c_bn: c, v_n: Vec3::zeros(), bg: settings.initial_bg, ba: settings.initial_ba };
            // start on the last coarse sample so the filter owns the rest
            (state, settings.initial_covariance(settings.init_attitude_sigma), n - 1, Some(c))
        }
    };
    let mut ekf = Ekf::new(state, p0, *earth, *settings, breaks);
    let period = 1.0 / settings.measurement_rate;
    let t_start = records.get(start).map_or(t_first, |r| r.t);
    let mut next_update = 1usize;
    let mut history = Vec::new();
    let mut max_innovation = 0.0f64;
    for rec in &records[start..] {
        ekf.propagate(rec);
        let due = t_start + next_update as f64 * period;
        if rec.t >= due - 1e-9 {
            next_update += 1;
            let z = ekf.update_zupt();
            max_innovation = max_innovation.max(z.amax());
            history.push(HistoryRow { t: rec.t, state: ekf.state, innovation: z, p_diag: diag(&ekf.p) });
        }
    }
    Ok(EkfRun {
        coarse_attitude,
        final_state: ekf.state,
        final_p_diag: diag(&ekf.p),
        max_innovation,
        resets: ekf.resets,
        history,
    })
}

fn diag(p: &Mat12) -> [f64; 12] {
    std::array::from_fn(|i| p[(i, i)])
}

/// Writes the filter history: time, Euler angles, velocity, gyro bias in
/// deg/h, accelerometer bias in m/s^2 and micro-g, and the covariance diagonal.
pub fn write_history_csv<W: Write>(mut w: W, history: &[HistoryRow]) -> io::Result<()> {
    write!(w, "t,roll_deg,yaw_deg,pitch_deg,v_n,v_u,v_e,bgx_deg_h,bgy_deg_h,bgz_deg_h")?;
    write!(w, ",bax,bay,baz,bax_ug,bay_ug,baz_ug")?;
    for name in ["phi", "dv", "dbg", "dba"] {
        for axis in ["x", "y", "z"] {
            write!(w, ",p_{name}_{axis}")?;
        }
    }
    writeln!(w)?;
    for h in history {
        let e = h.state.c_bn.to_euler().to_degrees();
        let s = &h.state;
        write!(w, "{}", h.t)?;
        for v in e.iter().chain(s.v_n.iter()) {
            write!(w, ",{v:e}")?;
        }
        for v in s.bg.iter() {
            write!(w, ",{:e}", v / DEG_H)?;
        }
        for v in s.ba.iter() {
            write!(w, ",{v:e}")?;
        }
        for v in s.ba.iter() {
            write!(w, ",{:e}", v / MICRO_G)?;
        }
        for v in h.p_diag {
            write!(w, ",{v:e}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

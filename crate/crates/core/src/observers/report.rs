//! Single-axis rotation observer pipeline and its serializable report.

use super::{
    bias_candidates, feasible_pairs, initial_attitude_lsq, io_ncr_omega, io_nfvr_omega, replay_residual,
    rotation_samples, sign_rule_pairs, static_constraint_residuals, BiasCandidateSet, ObserverError,
    ObserverTolerances, PairCheck, RotationSample,
};
use crate::attitude::{Dcm, Vec3};
use crate::earth::{EarthParams, STANDARD_GRAVITY};
use crate::imu::ImuRecord;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

const RAD_S_TO_DEG_H: f64 = 180.0 / std::f64::consts::PI * 3600.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationObserver {
    /// Constant-rate observer.
    Ncr,
    /// Fixed-axis varying-rate observer.
    Nfvr,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateSummary {
    /// Mean recovered rate [rad/s].
    pub mean: Vec3,
    pub axis: Vec3,
    /// Smallest and largest recovered rate magnitude [deg/s].
    pub min_deg_s: f64,
    pub max_deg_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttitudeSolution {
    pub ba: Vec3,
    pub bg: Vec3,
    pub c_bn0: Dcm,
    /// roll, yaw, pitch [deg]
    pub euler_deg: [f64; 3],
    pub bg_deg_h: Vec3,
    pub ba_ug: Vec3,
    /// Max gravity-balance residual over the window, relative to g.
    pub replay_residual: f64,
    /// Max relative static-constraint residual over the static records of the window.
    pub static_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObserverReport {
    pub observer: RotationObserver,
    pub omega_nb: RateSummary,
    pub candidates: BiasCandidateSet,
    pub pair_checks: Vec<PairCheck>,
    /// Whether the feasible pairs match the sign rule evaluated on the
    /// geometry implied by the first feasible pair.
    pub sign_rule_agrees: bool,
    pub separation_g_deg_h: f64,
    pub separation_a_m_s2: f64,
    pub attitude_solutions: Vec<AttitudeSolution>,
    /// Worst residual per constraint over all feasible pairs, relative units.
    pub diagnostics: BTreeMap<String, f64>,
    #[serde(skip)]
    pub samples: Vec<RotationSample>,
}

/// Full pipeline on one rotation segment: rate recovery, candidates,
/// feasible pairs and one initial attitude per pair.
///
/// `rotation` holds the segment records with derivatives, `window` the
/// records from t = 0 used for the attitude solve, `breaks` the rate-switch
/// times inside the window and `static_mask(k)` marks window records taken
/// while still.
pub fn run_rotation_observer(
    kind: RotationObserver,
    rotation: &[ImuRecord],
    window: &[ImuRecord],
    breaks: &[f64],
    static_mask: &dyn Fn(usize) -> bool,
    earth: &EarthParams,
    tol: &ObserverTolerances,
) -> Result<ObserverReport, ObserverError> {
    let samples = match kind {
        RotationObserver::Ncr => rotation_samples(rotation, io_ncr_omega(rotation, tol)?)?,
        RotationObserver::Nfvr => io_nfvr_omega(rotation, earth.g, tol)?,
    };
    let mut candidates = bias_candidates(&samples, earth, tol)?;
    let (pairs, pair_checks) = feasible_pairs(&candidates, &samples, earth, tol)?;
    candidates.feasible_pairs = pairs.clone();

    let n = samples.len() as f64;
    let mean = samples.iter().map(|s| s.omega_nb).sum::<Vec3>() / n;
    let rates = samples.iter().map(|s| s.omega_nb.norm().to_degrees());
    let omega_nb = RateSummary {
        mean,
        axis: mean.normalize(),
        min_deg_s: rates.clone().fold(f64::INFINITY, f64::min),
        max_deg_s: rates.fold(0.0, f64::max),
    };

    let mid = &samples[samples.len() / 2];
    let first = pairs[0];
    let wie = mid.rec.omega_ib_b - first.bg - mid.omega_nb;
    let g_b = first.ba - mid.rec.f_b;
    let rule = sign_rule_pairs(&mid.omega_nb, &wie, &g_b, 1e-6);
    let got: Vec<(i8, i8)> = pairs.iter().map(|p| (p.sign_a, p.sign_g)).collect();

    let mut diagnostics = BTreeMap::new();
    let mut attitude_solutions = Vec::new();
    for p in &pairs {
        let c_bn0 = initial_attitude_lsq(window, breaks, &p.bg, &p.ba, earth, tol)?;
        let replay = replay_residual(window, breaks, &c_bn0, &p.bg, &p.ba, earth);
        let mut worst = [0.0f64; 3];
        for (k, r) in window.iter().enumerate() {
            if static_mask(k) {
                let rel = static_constraint_residuals(r, &p.bg, &p.ba, earth).relative(earth);
                for j in 0..3 {
                    worst[j] = worst[j].max(rel[j].abs());
                }
            }
        }
        for (key, v) in ["gyro_norm", "accel_norm", "dot_product"].iter().zip(worst) {
            let e = diagnostics.entry(key.to_string()).or_insert(0.0f64);
            *e = e.max(v);
        }
        let e = diagnostics.entry("gravity_balance".to_string()).or_insert(0.0f64);
        *e = e.max(replay);
        attitude_solutions.push(AttitudeSolution {
            ba: p.ba,
            bg: p.bg,
            c_bn0,
            euler_deg: c_bn0.to_euler().to_degrees(),
            bg_deg_h: p.bg * RAD_S_TO_DEG_H,
            ba_ug: p.ba / STANDARD_GRAVITY * 1e6,
            replay_residual: replay,
            static_residual: worst.iter().fold(0.0, |m, x| m.max(*x)),
        });
    }
    let pair_constraint = pair_checks.iter().filter(|c| c.feasible).map(|c| c.residual).fold(0.0, f64::max);
    diagnostics.insert("pair_constraint".to_string(), pair_constraint);

    Ok(ObserverReport {
        observer: kind,
        omega_nb,
        separation_g_deg_h: candidates.separation_g() * RAD_S_TO_DEG_H,
        separation_a_m_s2: candidates.separation_a(),
        candidates,
        pair_checks,
        sign_rule_agrees: rule == got,
        attitude_solutions,
        diagnostics,
        samples,
    })
}

//! Rotation-rate recovery and bias candidates for a single-axis rotation.

use super::{trapezoid, Compensated, ObserverError, ObserverTolerances};
use crate::attitude::{cross_solve_parts, solve_spd, Mat3, Tolerances, Vec3};
use crate::earth::EarthParams;
use crate::imu::{ImuDerivatives, ImuRecord};
use nalgebra::SymmetricEigen;
use serde::Serialize;

/// One record of a rotation segment together with the recovered rotation rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationSample {
    pub rec: ImuRecord,
    pub d: ImuDerivatives,
    /// Recovered body rate relative to the navigation frame [rad/s].
    pub omega_nb: Vec3,
    /// Its time derivative [rad/s^2]; zero for a constant rotation.
    pub omega_nb_dot: Vec3,
}

fn with_derivs(records: &[ImuRecord]) -> Result<Vec<(ImuRecord, ImuDerivatives)>, ObserverError> {
    let out: Vec<_> = records.iter().filter_map(|r| r.derivs.map(|d| (*r, d))).collect();
    if out.is_empty() {
        return Err(match records.first() {
            Some(r) => ObserverError::MissingDerivatives(r.t),
            None => ObserverError::TooFewSamples { needed: 2, got: 0 },
        });
    }
    Ok(out)
}

/// Constant rotation rate from output derivatives.
///
/// Under constant rotation `omega_ib' x w = omega_ib''` and `f' x w = f''`
/// hold at every instant; stacking them by trapezoid quadrature gives the
/// normal equations `sum (-[a x]^2) w = sum b x a` over `(a, b)` in
/// `{(omega_ib', omega_ib''), (f', f'')}`. Records without derivatives are
/// skipped.
pub fn io_ncr_omega(records: &[ImuRecord], tol: &ObserverTolerances) -> Result<Vec3, ObserverError> {
    let recs = with_derivs(records)?;
    let n = recs.len();
    let mut gram = Compensated::new(Mat3::zeros());
    let mut rhs = Compensated::new(Vec3::zeros());
    for (i, (_, d)) in recs.iter().enumerate() {
        let w = trapezoid(n, i);
        for (a, b) in [(d.d1_omega, d.d2_omega), (d.d1_f, d.d2_f)] {
            let k = crate::attitude::skew(&a);
            gram.add(-(k * k) * w);
            rhs.add(b.cross(&a) * w);
        }
    }
    let (gram, rhs) = (gram.value(), rhs.value());
    let eig = SymmetricEigen::new(gram);
    let (lmax, lmin) = (eig.eigenvalues.max(), eig.eigenvalues.min());
    if lmax <= 0.0 {
        return Err(ObserverError::SingularGram(f64::INFINITY));
    }
    let cond = if lmin > 0.0 { lmax / lmin } else { f64::INFINITY };
    if cond > tol.gram_condition {
        return Err(ObserverError::SingularGram(cond));
    }
    Ok(solve_spd(&gram, &rhs, 0.0).expect("positive definite after condition check"))
}

/// Per-sample rotation rate and rate derivative for a fixed-axis rotation of
/// varying magnitude, from the specific-force derivatives alone:
/// `w = f'' x f' / |f'|^2` and `w' = w (f'.f'') / |f'|^2`.
pub fn io_nfvr_omega(
    records: &[ImuRecord],
    g: f64,
    tol: &ObserverTolerances,
) -> Result<Vec<RotationSample>, ObserverError> {
    let recs = with_derivs(records)?;
    let mut out = Vec::with_capacity(recs.len());
    for (rec, d) in recs {
        let fd2 = d.d1_f.norm_squared();
        let w = d.d2_f.cross(&d.d1_f) / fd2;
        if !(fd2.sqrt() > tol.fdot_floor * g * w.norm().max(f64::MIN_POSITIVE)) || !w.iter().all(|x| x.is_finite()) {
            return Err(ObserverError::VanishingFdot(rec.t));
        }
        let k = d.d1_f.dot(&d.d2_f) / fd2;
        out.push(RotationSample { rec, d, omega_nb: w, omega_nb_dot: w * k });
    }
    let axis = out[out.len() / 2].omega_nb.normalize();
    let spread = out.iter().map(|s| crate::attitude::sin_angle(&axis, &s.omega_nb).asin()).fold(0.0, f64::max);
    if spread > tol.axis_spread {
        return Err(ObserverError::AxisNotFixed(spread));
    }
    Ok(out)
}

/// Pairs every record that has derivatives with a constant rate.
pub fn rotation_samples(records: &[ImuRecord], omega_nb: Vec3) -> Result<Vec<RotationSample>, ObserverError> {
    Ok(with_derivs(records)?
        .into_iter()
        .map(|(rec, d)| RotationSample { rec, d, omega_nb, omega_nb_dot: Vec3::zeros() })
        .collect())
}

/// The two accelerometer-bias solutions at one instant and whether they coincide.
///
/// Returns `(ba+, ba-, collapsed)` where `ba+ - ba-` points along `omega_nb`.
pub fn accel_bias_candidates(
    omega_nb: &Vec3,
    rec: &ImuRecord,
    d: &ImuDerivatives,
    g: f64,
    tol: &ObserverTolerances,
) -> Result<(Vec3, Vec3, bool), ObserverError> {
    let (c, h) = accel_parts(omega_nb, rec, d, g)?;
    let collapsed = 2.0 * h.norm() < tol.collapse * g;
    Ok(if collapsed { (c, c, true) } else { (c + h, c - h, false) })
}

/// The two gyro-bias solutions at one instant, `(bg+, bg-, collapsed)`.
pub fn gyro_bias_candidates(
    omega_nb: &Vec3,
    omega_nb_dot: &Vec3,
    rec: &ImuRecord,
    d: &ImuDerivatives,
    omega_earth: f64,
    tol: &ObserverTolerances,
) -> Result<(Vec3, Vec3, bool), ObserverError> {
    let (c, h) = gyro_parts(omega_nb, omega_nb_dot, rec, d, omega_earth)?;
    let collapsed = 2.0 * h.norm() < tol.collapse * omega_earth;
    Ok(if collapsed { (c, c, true) } else { (c + h, c - h, false) })
}

fn solver_tol() -> Tolerances {
    Tolerances { perp: 1e-5, clamp: 1e-9, ..Tolerances::default() }
}

// `g_b = ba - f` satisfies `w x g_b = f'` with `|g_b| = g`.
fn accel_parts(w: &Vec3, rec: &ImuRecord, d: &ImuDerivatives, g: f64) -> Result<(Vec3, Vec3), ObserverError> {
    let (c, h) = cross_solve_parts(w, &d.d1_f, g, &solver_tol())?;
    Ok((rec.f_b + c, h))
}

// `m = bg - omega_ib + w = -omega_ie_b` satisfies `w x m = omega_ib' - w'` with `|m| = Omega`.
fn gyro_parts(
    w: &Vec3,
    w_dot: &Vec3,
    rec: &ImuRecord,
    d: &ImuDerivatives,
    omega_earth: f64,
) -> Result<(Vec3, Vec3), ObserverError> {
    let (c, h) = cross_solve_parts(w, &(d.d1_omega - w_dot), omega_earth, &solver_tol())?;
    Ok((rec.omega_ib_b - w + c, h))
}

/// The candidate biases of a single-axis rotation segment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasCandidateSet {
    pub ba_plus: Vec3,
    pub ba_minus: Vec3,
    pub bg_plus: Vec3,
    pub bg_minus: Vec3,
    pub collapsed_a: bool,
    pub collapsed_g: bool,
    /// Max per-sample deviation from the segment mean [m/s^2].
    pub deviation_a: f64,
    /// Max per-sample deviation from the segment mean [rad/s].
    pub deviation_g: f64,
    pub feasible_pairs: Vec<FeasiblePair>,
}

impl BiasCandidateSet {
    pub fn separation_a(&self) -> f64 {
        (self.ba_plus - self.ba_minus).norm()
    }

    pub fn separation_g(&self) -> f64 {
        (self.bg_plus - self.bg_minus).norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasiblePair {
    pub ba: Vec3,
    pub bg: Vec3,
    /// `+1` or `-1` branch of each candidate (0 when collapsed).
    pub sign_a: i8,
    pub sign_g: i8,
}

/// Outcome of the dot-product test for one of the four candidate combinations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairCheck {
    pub sign_a: i8,
    pub sign_g: i8,
    /// Max over the segment of `|-omega_ie_b.g_b - g Omega sin L| / (g Omega)`.
    pub residual: f64,
    pub feasible: bool,
}

/// Segment-level candidates: per-sample solutions, averaged, with a check
/// that every sample agrees with the mean. Feasible pairs are filled by
/// [`feasible_pairs`].
pub fn bias_candidates(
    samples: &[RotationSample],
    earth: &EarthParams,
    tol: &ObserverTolerances,
) -> Result<BiasCandidateSet, ObserverError> {
    if samples.is_empty() {
        return Err(ObserverError::TooFewSamples { needed: 1, got: 0 });
    }
    // The half-chord enters as a square root, so near a collapse its
    // per-sample length is dominated by rounding. Average the squared length
    // instead and rebuild the half-chord along the mean rotation axis.
    let mut centers = Vec::with_capacity(samples.len());
    let mut sq = Vec::with_capacity(samples.len());
    let mut axis = Compensated::new(Vec3::zeros());
    for s in samples {
        let (ca, ha) = accel_parts(&s.omega_nb, &s.rec, &s.d, earth.g)?;
        let (cg, hg) = gyro_parts(&s.omega_nb, &s.omega_nb_dot, &s.rec, &s.d, earth.omega)?;
        centers.push([ca, cg]);
        sq.push([ha.norm_squared(), hg.norm_squared()]);
        axis.add(s.omega_nb.normalize());
    }
    let axis = axis.value().normalize();
    let n = samples.len() as f64;
    let mean_c: [Vec3; 2] = std::array::from_fn(|j| {
        let mut s = Compensated::new(Vec3::zeros());
        centers.iter().for_each(|c| s.add(c[j]));
        s.value() / n
    });
    let mean_sq: [f64; 2] = std::array::from_fn(|j| {
        let mut s = Compensated::new(0.0);
        sq.iter().for_each(|q| s.add(q[j]));
        s.value() / n
    });
    let scales = [earth.g, earth.omega];
    // deviation of the candidates, with the half-chord spread measured on its square
    let dev = |j: usize| {
        let m = scales[j];
        centers
            .iter()
            .zip(&sq)
            .map(|(c, q)| (c[j] - mean_c[j]).norm().max((q[j] - mean_sq[j]).abs() / m))
            .fold(0.0, f64::max)
    };
    let (deviation_a, deviation_g) = (dev(0), dev(1));
    for (d, m) in [(deviation_a, earth.g), (deviation_g, earth.omega)] {
        if d > tol.consistency * m {
            return Err(ObserverError::InconsistentSegment { deviation: d, limit: tol.consistency * m });
        }
    }
    let half = |j: usize| axis * mean_sq[j].max(0.0).sqrt();
    let collapsed_a = 2.0 * half(0).norm() < tol.collapse * earth.g;
    let collapsed_g = 2.0 * half(1).norm() < tol.collapse * earth.omega;
    let (ha, hg) =
        (if collapsed_a { Vec3::zeros() } else { half(0) }, if collapsed_g { Vec3::zeros() } else { half(1) });
    Ok(BiasCandidateSet {
        ba_plus: mean_c[0] + ha,
        ba_minus: mean_c[0] - ha,
        bg_plus: mean_c[1] + hg,
        bg_minus: mean_c[1] - hg,
        collapsed_a,
        collapsed_g,
        deviation_a,
        deviation_g,
        feasible_pairs: Vec::new(),
    })
}

/// Tests the candidate combinations against `-omega_ie_b.g_b = g Omega sin L`
/// with `omega_ie_b = omega_ib - bg - w` and `g_b = ba - f`, keeping those
/// that hold on every sample. Duplicates from collapsed candidates are
/// dropped.
pub fn feasible_pairs(
    cands: &BiasCandidateSet,
    samples: &[RotationSample],
    earth: &EarthParams,
    tol: &ObserverTolerances,
) -> Result<(Vec<FeasiblePair>, Vec<PairCheck>), ObserverError> {
    let scale = earth.g * earth.omega;
    let target = earth.g_omega_sin_lat();
    let signs_a: &[i8] = if cands.collapsed_a { &[0] } else { &[1, -1] };
    let signs_g: &[i8] = if cands.collapsed_g { &[0] } else { &[1, -1] };
    let pick = |s: i8, plus: Vec3, minus: Vec3| if s >= 0 { plus } else { minus };
    let mut pairs = Vec::new();
    let mut checks = Vec::new();
    for &sa in signs_a {
        for &sg in signs_g {
            let ba = pick(sa, cands.ba_plus, cands.ba_minus);
            let bg = pick(sg, cands.bg_plus, cands.bg_minus);
            let residual = samples
                .iter()
                .map(|s| {
                    let wie = s.rec.omega_ib_b - bg - s.omega_nb;
                    let g_b = ba - s.rec.f_b;
                    (-wie.dot(&g_b) - target).abs() / scale
                })
                .fold(0.0, f64::max);
            let feasible = residual < tol.feasibility;
            checks.push(PairCheck { sign_a: sa, sign_g: sg, residual, feasible });
            if feasible {
                pairs.push(FeasiblePair { ba, bg, sign_a: sa, sign_g: sg });
            }
        }
    }
    if pairs.is_empty() {
        return Err(ObserverError::NoFeasiblePair);
    }
    Ok((pairs, checks))
}

/// The sign rule for feasible combinations, given the true rotation geometry:
/// same-sign pairs survive when `(w.omega_ie)(w.g) < 0`, mixed-sign pairs when
/// it is positive, and all combinations when either factor vanishes.
pub fn sign_rule_pairs(omega_nb: &Vec3, omega_ie_b: &Vec3, g_b: &Vec3, rel: f64) -> Vec<(i8, i8)> {
    let wn = omega_nb.norm();
    let pg = omega_nb.dot(g_b) / (wn * g_b.norm());
    let pw = omega_nb.dot(omega_ie_b) / (wn * omega_ie_b.norm());
    let signs_a: &[i8] = if pg.abs() < rel { &[0] } else { &[1, -1] };
    let signs_g: &[i8] = if pw.abs() < rel { &[0] } else { &[1, -1] };
    let mut out = Vec::new();
    for &sa in signs_a {
        for &sg in signs_g {
            let keep = sa == 0 || sg == 0 || (sa == sg) == (pg * pw < 0.0);
            if keep {
                out.push((sa, sg));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attitude::EulerAngles;
    use crate::scenario::{Motion, Scenario, Segment, Simulator};

    fn earth() -> EarthParams {
        EarthParams::from_degrees(28.2204, 60.0).unwrap()
    }

    fn nominal_biases() -> (Vec3, Vec3) {
        (Vec3::repeat((0.01f64 / 3600.0).to_radians()), Vec3::repeat(50e-6 * crate::earth::STANDARD_GRAVITY))
    }

    fn single_axis(axis: Vec3) -> Simulator {
        let (bg, ba) = nominal_biases();
        let seg = Segment::rotation(Motion::ConstRotation { axis, rate: 10f64.to_radians() }, 100.0, 500.0);
        Scenario::new(earth(), EulerAngles::default(), 600.0).with_segment(seg).with_biases(bg, ba).simulator().unwrap()
    }

    #[test]
    fn static_stream_is_singular() {
        let sim = single_axis(Vec3::y());
        let recs: Vec<ImuRecord> = sim
            .imu_range(0..100)
            .into_iter()
            .map(|mut r| {
                r.derivs = Some(ImuDerivatives {
                    d1_omega: Vec3::zeros(),
                    d2_omega: Vec3::zeros(),
                    d1_f: Vec3::zeros(),
                    d2_f: Vec3::zeros(),
                });
                r
            })
            .collect();
        assert!(matches!(io_ncr_omega(&recs, &ObserverTolerances::default()), Err(ObserverError::SingularGram(_))));
        assert!(matches!(
            io_ncr_omega(&sim.imu_range(0..10), &ObserverTolerances::default()),
            Err(ObserverError::MissingDerivatives(_))
        ));
    }

    #[test]
    fn updown_candidates_and_pairs() {
        let sim = single_axis(Vec3::y());
        let tol = ObserverTolerances::default();
        let recs = sim.imu_range_with_derivatives(10_000..12_000).unwrap();
        let w = io_ncr_omega(&recs, &tol).unwrap();
        assert!((w - Vec3::y() * 10f64.to_radians()).amax() < 1e-10);
        let samples = rotation_samples(&recs, w).unwrap();
        let c = bias_candidates(&samples, &earth(), &tol).unwrap();
        assert!(!c.collapsed_a && !c.collapsed_g);
        let (pairs, checks) = feasible_pairs(&c, &samples, &earth(), &tol).unwrap();
        assert_eq!(pairs.len(), 2);
        assert_eq!(checks.len(), 4);
        let tr = sim.truth(10_500);
        let rule = sign_rule_pairs(&tr.omega_nb_b, &tr.omega_ie_b, &tr.g_b, 1e-9);
        let got: Vec<(i8, i8)> = pairs.iter().map(|p| (p.sign_a, p.sign_g)).collect();
        assert_eq!(got, rule);
        // rejected combinations miss by 2 |w.wie| |w.g| / |w|^2, scaled by g Omega
        let e = earth();
        let expect = 2.0 * e.omega * e.latitude.sin() * e.g / (e.g * e.omega);
        for ch in checks.iter().filter(|c| !c.feasible) {
            assert!((ch.residual - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn per_sample_candidates_match_segment() {
        let sim = single_axis(Vec3::z());
        let tol = ObserverTolerances::default();
        let r = sim.imu_with_derivatives(20_000).unwrap();
        let w = sim.truth(20_000).omega_nb_b;
        let (p, m, collapsed) = accel_bias_candidates(&w, &r, &r.derivs.unwrap(), earth().g, &tol).unwrap();
        assert!(collapsed && p == m);
        assert!((p - nominal_biases().1).amax() < 1e-9);
        let (p, m, collapsed) =
            gyro_bias_candidates(&w, &Vec3::zeros(), &r, &r.derivs.unwrap(), earth().omega, &tol).unwrap();
        assert!(collapsed && p == m);
        assert!((p - nominal_biases().0).amax() < 1e-15);
    }

    #[test]
    fn wrong_rate_is_inconsistent() {
        let sim = single_axis(Vec3::y());
        let tol = ObserverTolerances::default();
        let recs = sim.imu_range_with_derivatives(10_000..13_000).unwrap();
        let samples = rotation_samples(&recs, Vec3::new(0.0, 10f64.to_radians(), 1e-4)).unwrap();
        assert!(bias_candidates(&samples, &earth(), &tol).is_err());
    }
}

//! SO(3) primitives and the vector-geometry solvers the observers are built on.
//!
//! Attitude convention: a [`Dcm`] named `c_bn` maps body-frame coordinates to
//! navigation-frame coordinates, `v_n = c_bn * v_b`. The navigation frame is
//! local level with axes ordered (North, Up, East).

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};
use std::ops::Mul;
use thiserror::Error;

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Below this rotation angle [rad] `so3_exp` switches to its series form.
pub const SMALL_ANGLE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum AttitudeError {
    #[error("vector directions are degenerate (all within {0:e} rad of collinear)")]
    DegenerateDirections(f64),
    #[error("need at least {needed} inputs, got {got}")]
    TooFewInputs { needed: usize, got: usize },
    #[error("sphere points are inconsistent: residual {residual:e} exceeds {limit:e}")]
    Inconsistent { residual: f64, limit: f64 },
    #[error("all direction vectors are parallel; the component along them is free")]
    ConstantDirection,
    #[error("cross-product axis has zero length")]
    ZeroAxis,
    #[error("right-hand side is not perpendicular to the axis (|a.b| = {0:e})")]
    NotPerpendicular(f64),
    #[error("norm constraint cannot be met: |a|^2 |m|^2 - |b|^2 = {0:e}")]
    NormInfeasible(f64),
    #[error("matrix is not a rotation (orthonormality error {0:e})")]
    NotRotation(f64),
}

/// Numerical tolerances of the geometry solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Minimum angle [rad] separating two directions before they count as distinct.
    pub dir: f64,
    /// Relative singular-value floor used for rank decisions.
    pub rank: f64,
    /// Relative bound on |a.b| / (|a| max(|b|, |a||m|)) for "perpendicular".
    pub perp: f64,
    /// Relative slack before a negative square-root argument is an error.
    pub clamp: f64,
    /// Relative (to the radius) residual bound for a full-rank sphere solve.
    pub sphere_residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { dir: 1e-6, rank: 1e-8, perp: 1e-6, clamp: 1e-12, sphere_residual: 1e-6 }
    }
}

/// Skew-symmetric cross-product matrix: `skew(v) * w == v.cross(&w)`.
pub fn skew(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Axial vector of the skew-symmetric part of `m`.
pub fn vee(m: &Mat3) -> Vec3 {
    Vec3::new(m[(2, 1)] - m[(1, 2)], m[(0, 2)] - m[(2, 0)], m[(1, 0)] - m[(0, 1)]) * 0.5
}

/// Rodrigues exponential of a rotation vector.
pub fn so3_exp(rotvec: &Vec3) -> Dcm {
    let theta = rotvec.norm();
    let k = skew(rotvec);
    let k2 = k * k;
    let m = if theta < SMALL_ANGLE {
        Mat3::identity() + k + k2 * 0.5
    } else {
        // 1 - cos = 2 sin^2(theta / 2) avoids cancellation at small angles
        let h = (0.5 * theta).sin() / theta;
        Mat3::identity() + k * (theta.sin() / theta) + k2 * (2.0 * h * h)
    };
    Dcm(m)
}

/// Euler angles of the body frame relative to the navigation frame.
///
/// The rotation sequence from navigation to body axes is yaw about y, then
/// pitch about z, then roll about x, so `c_bn = Ry(yaw) Rz(pitch) Rx(roll)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EulerAngles {
    pub roll: f64,
    pub yaw: f64,
    pub pitch: f64,
}

impl EulerAngles {
    pub fn new(roll: f64, yaw: f64, pitch: f64) -> Self {
        Self { roll, yaw, pitch }
    }

    pub fn from_degrees(roll: f64, yaw: f64, pitch: f64) -> Self {
        Self::new(roll.to_radians(), yaw.to_radians(), pitch.to_radians())
    }

    pub fn to_degrees(self) -> [f64; 3] {
        [self.roll.to_degrees(), self.yaw.to_degrees(), self.pitch.to_degrees()]
    }
}

/// Direction cosine matrix on SO(3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dcm(Mat3);

impl Dcm {
    /// Max-entry bound on `m^T m - I` (and on `det - 1`) for a valid rotation.
    pub const ORTHO_TOL: f64 = 1e-9;

    pub fn identity() -> Self {
        Dcm(Mat3::identity())
    }

    /// Wraps `m` after checking orthonormality and a positive determinant.
    pub fn from_matrix(m: Mat3) -> Result<Self, AttitudeError> {
        let err = orthonormality_error(&m);
        if err < Self::ORTHO_TOL {
            Ok(Dcm(m))
        } else {
            Err(AttitudeError::NotRotation(err))
        }
    }

    /// Nearest rotation in the Frobenius sense (polar factor with det = +1).
    pub fn nearest(m: &Mat3) -> Self {
        let svd = m.svd(true, true);
        let u = svd.u.expect("svd u");
        let v_t = svd.v_t.expect("svd v_t");
        let d = (u * v_t).determinant().signum();
        let fix = Mat3::from_diagonal(&Vec3::new(1.0, 1.0, d));
        Dcm(u * fix * v_t)
    }

    pub fn from_euler(e: EulerAngles) -> Self {
        let ry = so3_exp(&(Vec3::y() * e.yaw));
        let rz = so3_exp(&(Vec3::z() * e.pitch));
        let rx = so3_exp(&(Vec3::x() * e.roll));
        ry * rz * rx
    }

    pub fn to_euler(&self) -> EulerAngles {
        let m = &self.0;
        let pitch = m[(1, 0)].clamp(-1.0, 1.0).asin();
        let yaw = (-m[(2, 0)]).atan2(m[(0, 0)]);
        let roll = (-m[(1, 2)]).atan2(m[(1, 1)]);
        EulerAngles { roll, yaw, pitch }
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn transpose(&self) -> Dcm {
        Dcm(self.0.transpose())
    }

    pub fn rotate(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }

    /// Rotates by the transpose, i.e. maps navigation coordinates back to body.
    pub fn rotate_inv(&self, v: &Vec3) -> Vec3 {
        self.0.tr_mul(v)
    }

    /// Rotation vector `v` with `so3_exp(v) == self`.
    pub fn log(&self) -> Vec3 {
        let axial = vee(&self.0);
        let s = axial.norm();
        let c = ((self.0.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
        let theta = s.atan2(c);
        if s < 1e-6 && c > 0.0 {
            // near identity: theta ~ s
            return axial * (1.0 + s * s / 6.0);
        }
        if s < 1e-6 {
            // near pi: axis from the symmetric part
            let b = (self.0 + Mat3::identity()) * 0.5;
            let (i, _) = (0..3).map(|i| (i, b[(i, i)])).fold((0, f64::MIN), |acc, x| if x.1 > acc.1 { x } else { acc });
            let mut axis = b.column(i).into_owned();
            axis /= axis.norm();
            if axis.dot(&axial) < 0.0 {
                axis = -axis;
            }
            return axis * theta;
        }
        axial * (theta / s)
    }

    /// Angle [rad] of the relative rotation between `self` and `other`.
    pub fn angle_to(&self, other: &Dcm) -> f64 {
        let r = self.0.tr_mul(&other.0);
        let s = vee(&r).norm();
        let c = (r.trace() - 1.0) * 0.5;
        s.atan2(c)
    }

    pub fn orthonormality_error(&self) -> f64 {
        orthonormality_error(&self.0)
    }

    /// Re-projects onto SO(3); used to bleed off rounding drift in long propagations.
    pub fn renormalized(&self) -> Dcm {
        Dcm::nearest(&self.0)
    }
}

impl Serialize for Dcm {
    /// Serialized as three rows.
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let m = &self.0;
        let rows: [[f64; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]));
        rows.serialize(s)
    }
}

impl Mul for Dcm {
    type Output = Dcm;
    fn mul(self, rhs: Dcm) -> Dcm {
        Dcm(self.0 * rhs.0)
    }
}

impl Mul<Vec3> for Dcm {
    type Output = Vec3;
    fn mul(self, rhs: Vec3) -> Vec3 {
        self.0 * rhs
    }
}

fn orthonormality_error(m: &Mat3) -> f64 {
    let e = m.tr_mul(m) - Mat3::identity();
    e.amax().max((m.determinant() - 1.0).abs())
}

/// Sine of the angle between two non-zero vectors.
pub(crate) fn sin_angle(a: &Vec3, b: &Vec3) -> f64 {
    let d = a.norm() * b.norm();
    if d == 0.0 {
        0.0
    } else {
        a.cross(b).norm() / d
    }
}

/// True when some pair of the non-zero vectors is more than `eps` rad from parallel.
pub(crate) fn has_two_directions<'a>(vs: impl IntoIterator<Item = &'a Vec3> + Clone, eps: f64) -> bool {
    let reference = vs.clone().into_iter().fold(None::<&Vec3>, |best, v| match best {
        Some(b) if b.norm() >= v.norm() => Some(b),
        _ => Some(v),
    });
    let Some(r) = reference else { return false };
    if r.norm() == 0.0 {
        return false;
    }
    vs.into_iter().any(|v| v.norm() > 0.0 && sin_angle(r, v) > eps.sin())
}

/// Attitude from vector pairs measured in two frames.
///
/// Returns the rotation `c` minimising `sum |c * a - b|^2` over the pairs
/// `(a, b)`, where `a` is in frame A and `b` in frame B (orthogonal Procrustes).
pub fn attitude_from_vector_pairs(pairs: &[(Vec3, Vec3)]) -> Result<Dcm, AttitudeError> {
    attitude_from_vector_pairs_with(pairs, &Tolerances::default())
}

pub fn attitude_from_vector_pairs_with(pairs: &[(Vec3, Vec3)], tol: &Tolerances) -> Result<Dcm, AttitudeError> {
    if pairs.len() < 2 {
        return Err(AttitudeError::TooFewInputs { needed: 2, got: pairs.len() });
    }
    if !has_two_directions(pairs.iter().map(|p| &p.0), tol.dir) {
        return Err(AttitudeError::DegenerateDirections(tol.dir));
    }
    let b: Mat3 = pairs.iter().map(|(a, b)| b * a.transpose()).sum();
    Ok(Dcm::nearest(&b))
}

/// Geometric locus of the points at distance `r` from every input point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SphereLocus {
    Unique {
        point: Vec3,
    },
    /// Both intersections of the solution line with the first sphere (equal when tangent).
    TwoPoints {
        p1: Vec3,
        p2: Vec3,
    },
    Circle {
        center: Vec3,
        axis: Vec3,
        radius: f64,
    },
    Sphere {
        center: Vec3,
        radius: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphereSolution {
    /// Rank of the scatter matrix of the point differences.
    pub rank: usize,
    pub locus: SphereLocus,
}

impl SphereSolution {
    pub fn point(&self) -> Option<Vec3> {
        match self.locus {
            SphereLocus::Unique { point } => Some(point),
            _ => None,
        }
    }
}

/// Solves `|a_k - x| = r` for the unknown centre `x`.
///
/// With four or more non-coplanar points the solution is unique; otherwise the
/// returned locus describes the family of solutions.
pub fn point_from_spheres(points: &[Vec3], r: f64) -> Result<SphereSolution, AttitudeError> {
    point_from_spheres_with(points, r, &Tolerances::default())
}

pub fn point_from_spheres_with(points: &[Vec3], r: f64, tol: &Tolerances) -> Result<SphereSolution, AttitudeError> {
    let Some(a1) = points.first() else {
        return Err(AttitudeError::TooFewInputs { needed: 1, got: 0 });
    };
    let a1_sq = a1.norm_squared();
    let mut scatter = Mat3::zeros();
    let mut rhs = Vec3::zeros();
    for a in &points[1..] {
        let d = a - a1;
        scatter += d * d.transpose();
        rhs += d * ((a.norm_squared() - a1_sq) * 0.5);
    }

    let eig = SymmetricEigen::new(scatter);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let lmax = eig.eigenvalues[order[0]];
    let rank = if lmax <= tol.rank * r * r {
        0
    } else {
        order.iter().filter(|&&i| eig.eigenvalues[i] > tol.rank * lmax).count()
    };
    let vec = |k: usize| eig.eigenvectors.column(order[k]).into_owned();

    // Minimum-norm solution of the difference equations restricted to the
    // well-determined eigen-directions.
    let particular: Vec3 = (0..rank)
        .map(|k| {
            let v = vec(k);
            v * (v.dot(&rhs) / eig.eigenvalues[order[k]])
        })
        .sum();

    let locus = match rank {
        3 => {
            let residual = points.iter().map(|a| ((a - particular).norm() - r).abs()).fold(0.0, f64::max);
            let limit = tol.sphere_residual * r;
            if residual > limit {
                return Err(AttitudeError::Inconsistent { residual, limit });
            }
            SphereLocus::Unique { point: particular }
        }
        2 => {
            // x = particular + alpha * normal; intersect with the first sphere.
            let n = vec(2);
            let w = a1 - particular;
            let half_b = n.dot(&w);
            let c = w.norm_squared() - r * r;
            let disc = half_b * half_b - c;
            let disc = clamp_or_fail(disc, tol.clamp * r * r)?;
            let s = disc.sqrt();
            SphereLocus::TwoPoints { p1: particular + n * (half_b + s), p2: particular + n * (half_b - s) }
        }
        1 => {
            let l = vec(0);
            // plane l.x = l.particular, centre = projection of a1 onto it
            let offset = l.dot(&particular) - l.dot(a1);
            let center = a1 + l * offset;
            let rad2 = clamp_or_fail(r * r - offset * offset, tol.clamp * r * r)?;
            SphereLocus::Circle { center, axis: l, radius: rad2.sqrt() }
        }
        _ => SphereLocus::Sphere { center: *a1, radius: r },
    };
    Ok(SphereSolution { rank, locus })
}

fn clamp_or_fail(x: f64, slack: f64) -> Result<f64, AttitudeError> {
    if x >= 0.0 {
        Ok(x)
    } else if x >= -slack {
        Ok(0.0)
    } else {
        let residual = (-x).sqrt();
        Err(AttitudeError::Inconsistent { residual, limit: slack.sqrt() })
    }
}

/// Least-squares solve of `a_k x m = b_k` for a constant vector `m`.
///
/// Needs at least two non-parallel `a_k`.
pub fn constant_vector_from_cross(samples: &[(Vec3, Vec3)]) -> Result<Vec3, AttitudeError> {
    constant_vector_from_cross_with(samples, &Tolerances::default())
}

pub fn constant_vector_from_cross_with(samples: &[(Vec3, Vec3)], tol: &Tolerances) -> Result<Vec3, AttitudeError> {
    if !has_two_directions(samples.iter().map(|s| &s.0), tol.dir) {
        return Err(AttitudeError::ConstantDirection);
    }
    // normal equations: sum skew(a)^T skew(a) m = sum skew(a)^T b
    let mut n = Mat3::zeros();
    let mut rhs = Vec3::zeros();
    for (a, b) in samples {
        let k = skew(a);
        n += k.tr_mul(&k);
        rhs += k.tr_mul(b);
    }
    solve_spd(&n, &rhs, tol.rank).ok_or(AttitudeError::ConstantDirection)
}

/// Solves a symmetric positive (semi)definite 3x3 system, `None` when the
/// smallest eigenvalue is below `rel * largest`.
pub(crate) fn solve_spd(n: &Mat3, rhs: &Vec3, rel: f64) -> Option<Vec3> {
    let eig = SymmetricEigen::new(*n);
    let lmax = eig.eigenvalues.amax();
    if lmax == 0.0 || eig.eigenvalues.min() <= rel * lmax {
        return None;
    }
    let mut x = Vec3::zeros();
    for k in 0..3 {
        let v = eig.eigenvectors.column(k);
        x += v * (v.dot(rhs) / eig.eigenvalues[k]);
    }
    Some(x)
}

/// Both solutions of `a x m = b` with a prescribed `|m|`.
///
/// `m = ±a sqrt(|a|^2 |m|^2 - |b|^2) / |a|^2 - a x b / |a|^2`; the two
/// solutions coincide when the square-root argument clamps to zero.
pub fn cross_solve_with_norm(a: &Vec3, b: &Vec3, m_norm: f64) -> Result<(Vec3, Vec3), AttitudeError> {
    cross_solve_with_norm_with(a, b, m_norm, &Tolerances::default())
}

pub fn cross_solve_with_norm_with(
    a: &Vec3,
    b: &Vec3,
    m_norm: f64,
    tol: &Tolerances,
) -> Result<(Vec3, Vec3), AttitudeError> {
    let (center, half) = cross_solve_parts(a, b, m_norm, tol)?;
    Ok((center + half, center - half))
}

/// Returns the common part `-a x b / |a|^2` and the signed half-separation
/// `a sqrt(..) / |a|^2` of the two norm-constrained solutions.
pub(crate) fn cross_solve_parts(
    a: &Vec3,
    b: &Vec3,
    m_norm: f64,
    tol: &Tolerances,
) -> Result<(Vec3, Vec3), AttitudeError> {
    let a2 = a.norm_squared();
    if a2 == 0.0 {
        return Err(AttitudeError::ZeroAxis);
    }
    let ab = a.dot(b);
    // measured against the largest admissible |b| = |a| |m|, so a right-hand
    // side that should vanish but carries rounding still passes
    if ab.abs() >= tol.perp * a.norm() * b.norm().max(a.norm() * m_norm) && ab != 0.0 {
        return Err(AttitudeError::NotPerpendicular(ab.abs()));
    }
    let full = a2 * m_norm * m_norm;
    let b2 = b.norm_squared();
    let mut arg = full - b2;
    if arg < 0.0 {
        if arg >= -tol.clamp * full.max(b2) {
            arg = 0.0;
        } else {
            return Err(AttitudeError::NormInfeasible(arg));
        }
    }
    let center = -a.cross(b) / a2;
    let half = a * (arg.sqrt() / a2);
    Ok((center, half))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn close(a: &Vec3, b: &Vec3, tol: f64) -> bool {
        (a - b).amax() < tol
    }

    #[test]
    fn skew_basics() {
        assert_eq!(skew(&Vec3::zeros()), Mat3::zeros());
        assert_eq!(skew(&Vec3::z()) * Vec3::x(), Vec3::y());
        let v = Vec3::new(0.3, -1.2, 2.5);
        let w = Vec3::new(-0.7, 0.4, 1.1);
        // componentwise cross product
        let c = Vec3::new(v.y * w.z - v.z * w.y, v.z * w.x - v.x * w.z, v.x * w.y - v.y * w.x);
        assert!(close(&(skew(&v) * w), &c, 1e-15));
        assert_eq!(skew(&v).transpose(), -skew(&v));
        assert_eq!(vee(&skew(&v)), v);
    }

    #[test]
    fn exp_cases() {
        assert_eq!(so3_exp(&Vec3::zeros()), Dcm::identity());
        let q = so3_exp(&(Vec3::z() * FRAC_PI_2));
        assert!(close(&q.rotate(&Vec3::x()), &Vec3::y(), 1e-12));
        let tiny = Vec3::new(1e-9, -2e-9, 3e-10);
        let r = so3_exp(&tiny);
        assert!(r.orthonormality_error() < 1e-15);
        assert!(close(&r.log(), &tiny, 1e-20));
    }

    #[test]
    fn log_inverts_exp_including_near_pi() {
        for v in [
            Vec3::new(0.1, 0.2, -0.3),
            Vec3::new(0.0, 0.0, PI - 1e-9),
            Vec3::new(PI * 0.999, 0.0, 0.0),
            Vec3::new(1e-7, 0.0, 0.0),
        ] {
            let back = so3_exp(&v).log();
            assert!(close(&back, &v, 1e-8), "{v} -> {back}");
        }
    }

    #[test]
    fn euler_round_trip_and_axes() {
        let e = EulerAngles::from_degrees(20.0, 30.0, 10.0);
        let c = Dcm::from_euler(e);
        let back = c.to_euler();
        assert!((back.roll - e.roll).abs() < 1e-12);
        assert!((back.yaw - e.yaw).abs() < 1e-12);
        assert!((back.pitch - e.pitch).abs() < 1e-12);
        // a pure roll of 180 deg flips up and east
        let flip = Dcm::from_euler(EulerAngles::from_degrees(180.0, 0.0, 0.0));
        assert!(close(&flip.rotate(&Vec3::y()), &-Vec3::y(), 1e-12));
        assert!((flip.to_euler().roll.abs() - PI).abs() < 1e-12);
    }

    #[test]
    fn from_matrix_rejects_reflection() {
        let m = Mat3::from_diagonal(&Vec3::new(1.0, 1.0, -1.0));
        assert!(matches!(Dcm::from_matrix(m), Err(AttitudeError::NotRotation(_))));
        assert!(Dcm::from_matrix(Mat3::identity()).is_ok());
    }

    #[test]
    fn pairs_identity_and_degenerate() {
        let c = attitude_from_vector_pairs(&[(Vec3::x(), Vec3::x()), (Vec3::y(), Vec3::y())]).unwrap();
        assert!((c.matrix() - Mat3::identity()).amax() < 1e-15);
        let err = attitude_from_vector_pairs(&[(Vec3::x(), Vec3::x()), (Vec3::x() * 2.0, Vec3::x())]);
        assert!(matches!(err, Err(AttitudeError::DegenerateDirections(_))));
        assert!(matches!(
            attitude_from_vector_pairs(&[(Vec3::x(), Vec3::x())]),
            Err(AttitudeError::TooFewInputs { .. })
        ));
    }

    #[test]
    fn spheres_unique_example() {
        let pts =
            [Vec3::new(3.0, 2.0, 3.0), Vec3::new(1.0, 4.0, 3.0), Vec3::new(1.0, 2.0, 5.0), Vec3::new(1.0, 2.0, 1.0)];
        let sol = point_from_spheres(&pts, 2.0).unwrap();
        assert_eq!(sol.rank, 3);
        assert!(close(&sol.point().unwrap(), &Vec3::new(1.0, 2.0, 3.0), 1e-12));
    }

    #[test]
    fn spheres_singular_cases() {
        let x = Vec3::new(0.5, -1.0, 2.0);
        let r = 1.5;
        // three non-collinear points on the sphere: plane -> two mirror points
        let pts = [x + Vec3::x() * r, x + Vec3::y() * r, x - Vec3::x() * r];
        let sol = point_from_spheres(&pts, r).unwrap();
        assert_eq!(sol.rank, 2);
        match sol.locus {
            SphereLocus::TwoPoints { p1, p2 } => {
                assert!(close(&p1, &x, 1e-12) || close(&p2, &x, 1e-12));
                for p in [p1, p2] {
                    for a in &pts {
                        assert!(((a - p).norm() - r).abs() < 1e-12);
                    }
                }
            }
            other => panic!("unexpected {other:?}"),
        }
        // collinear points: circle
        let pts = [x + Vec3::z() * r, x - Vec3::z() * r];
        let sol = point_from_spheres(&pts, r).unwrap();
        assert_eq!(sol.rank, 1);
        match sol.locus {
            SphereLocus::Circle { center, axis, radius } => {
                assert!(close(&center, &x, 1e-12));
                assert!(axis.cross(&Vec3::z()).norm() < 1e-12);
                assert!(radius.abs() < 1e-6);
            }
            other => panic!("unexpected {other:?}"),
        }
        // coincident points: sphere
        let a = Vec3::new(1.0, 1.0, 1.0);
        let sol = point_from_spheres(&[a, a, a], 2.0).unwrap();
        assert_eq!(sol.rank, 0);
        assert_eq!(sol.locus, SphereLocus::Sphere { center: a, radius: 2.0 });
    }

    #[test]
    fn spheres_inconsistent_input() {
        let pts =
            [Vec3::new(3.0, 2.0, 3.0), Vec3::new(1.0, 4.0, 3.0), Vec3::new(1.0, 2.0, 5.0), Vec3::new(1.0, 2.0, 1.5)];
        assert!(matches!(point_from_spheres(&pts, 2.0), Err(AttitudeError::Inconsistent { .. })));
    }

    #[test]
    fn cross_vector_examples() {
        let m = Vec3::new(1.0, 2.0, 3.0);
        let s: Vec<_> = [Vec3::x(), Vec3::y()].iter().map(|a| (*a, a.cross(&m))).collect();
        assert!(close(&constant_vector_from_cross(&s).unwrap(), &m, 1e-12));
        let s: Vec<_> = [Vec3::z(), Vec3::z() * 3.0].iter().map(|a| (*a, a.cross(&m))).collect();
        assert_eq!(constant_vector_from_cross(&s), Err(AttitudeError::ConstantDirection));
    }

    #[test]
    fn norm_constrained_examples() {
        let (p, m) = cross_solve_with_norm(&Vec3::z(), &Vec3::y(), 1.0).unwrap();
        assert!(close(&p, &Vec3::x(), 1e-15) && close(&m, &Vec3::x(), 1e-15));

        let a = Vec3::new(0.0, 0.0, 2.0);
        let b = Vec3::new(0.0, 2.0, 0.0);
        let (p, m) = cross_solve_with_norm(&a, &b, 2f64.sqrt()).unwrap();
        assert!(close(&p, &Vec3::new(1.0, 0.0, 1.0), 1e-15));
        assert!(close(&m, &Vec3::new(1.0, 0.0, -1.0), 1e-15));
        for s in [p, m] {
            assert!(close(&a.cross(&s), &b, 1e-15));
        }

        assert!(matches!(
            cross_solve_with_norm(&Vec3::z(), &(Vec3::y() * 2.0), 1.0),
            Err(AttitudeError::NormInfeasible(_))
        ));
        assert!(matches!(
            cross_solve_with_norm(&Vec3::z(), &Vec3::new(0.0, 1.0, 1.0), 2.0),
            Err(AttitudeError::NotPerpendicular(_))
        ));
        assert_eq!(cross_solve_with_norm(&Vec3::zeros(), &Vec3::y(), 1.0), Err(AttitudeError::ZeroAxis));
    }
}

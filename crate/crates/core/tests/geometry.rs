use ins_align::attitude::{
    attitude_from_vector_pairs, constant_vector_from_cross, cross_solve_with_norm, point_from_spheres, so3_exp,
    AttitudeError, SphereLocus, Vec3,
};
use proptest::prelude::*;

fn vec3(scale: f64) -> impl Strategy<Value = Vec3> {
    (-scale..scale, -scale..scale, -scale..scale).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn unit() -> impl Strategy<Value = Vec3> {
    vec3(1.0).prop_filter("non-zero", |v| v.norm() > 0.1).prop_map(|v| v.normalize())
}

fn rel(a: &Vec3, b: &Vec3) -> f64 {
    (a - b).amax() / b.amax().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn spheres_recover_the_centre(x in vec3(10.0), r in 0.5f64..5.0, dirs in prop::collection::vec(unit(), 4..8)) {
        let spread = (dirs[1] - dirs[0]).cross(&(dirs[2] - dirs[0])).dot(&(dirs[3] - dirs[0])).abs();
        prop_assume!(spread > 0.05);
        let points: Vec<Vec3> = dirs.iter().map(|d| x + d * r).collect();
        let sol = point_from_spheres(&points, r).unwrap();
        prop_assert_eq!(sol.rank, 3);
        let p = sol.point().unwrap();
        prop_assert!(rel(&p, &x) < 1e-10);
    }

    #[test]
    fn three_spheres_never_give_a_unique_point(x in vec3(10.0), r in 0.5f64..5.0, dirs in prop::collection::vec(unit(), 3)) {
        prop_assume!((dirs[1] - dirs[0]).cross(&(dirs[2] - dirs[0])).norm() > 0.05);
        let points: Vec<Vec3> = dirs.iter().map(|d| x + d * r).collect();
        let sol = point_from_spheres(&points, r).unwrap();
        prop_assert!(sol.rank < 3);
        match sol.locus {
            SphereLocus::TwoPoints { p1, p2 } => prop_assert!(rel(&p1, &x) < 1e-9 || rel(&p2, &x) < 1e-9),
            SphereLocus::Unique { .. } => prop_assert!(false, "unique point from three spheres"),
            _ => {}
        }
    }

    #[test]
    fn constant_vector_round_trip(m in vec3(10.0), axes in prop::collection::vec(vec3(1.0), 2..10)) {
        let samples: Vec<(Vec3, Vec3)> = axes.iter().map(|a| (*a, a.cross(&m))).collect();
        match constant_vector_from_cross(&samples) {
            Ok(est) => prop_assert!(rel(&est, &m) < 1e-10),
            Err(e) => prop_assert_eq!(e, AttitudeError::ConstantDirection),
        }
    }

    #[test]
    fn parallel_axes_leave_the_vector_free(m in vec3(10.0), a in unit(), scales in prop::collection::vec(-3.0f64..3.0, 2..6)) {
        let samples: Vec<(Vec3, Vec3)> = scales.iter().map(|s| (a * *s, (a * *s).cross(&m))).collect();
        prop_assert_eq!(constant_vector_from_cross(&samples), Err(AttitudeError::ConstantDirection));
    }

    #[test]
    fn cross_with_norm_round_trip(a in vec3(5.0), m in vec3(5.0)) {
        prop_assume!(a.norm() > 1e-3);
        let b = a.cross(&m);
        let (mp, mm) = cross_solve_with_norm(&a, &b, m.norm()).unwrap();
        let scale = m.norm().max(1.0);
        prop_assert!(((mp - m).amax()).min((mm - m).amax()) / scale < 1e-10);
        for s in [mp, mm] {
            prop_assert!((a.cross(&s) - b).amax() / (a.norm() * scale) < 1e-10);
            prop_assert!((s.norm() - m.norm()).abs() / scale < 1e-10);
        }
    }

    #[test]
    fn cross_with_short_norm_is_infeasible(a in vec3(5.0), m in vec3(5.0), shrink in 0.0f64..0.99) {
        prop_assume!(a.norm() > 1e-3);
        let b = a.cross(&m);
        prop_assume!(b.norm() / a.norm() > 1e-3);
        let min_norm = b.norm() / a.norm();
        let got = cross_solve_with_norm(&a, &b, min_norm * shrink);
        prop_assert!(matches!(got, Err(AttitudeError::NormInfeasible(_))), "{:?}", got);
    }

    #[test]
    fn vector_pairs_recover_the_rotation(rv in vec3(3.0), dirs in prop::collection::vec(unit(), 2..6)) {
        prop_assume!(dirs[0].cross(&dirs[1]).norm() > 0.1);
        let c = so3_exp(&rv);
        let pairs: Vec<(Vec3, Vec3)> = dirs.iter().map(|d| (*d, c.rotate(d))).collect();
        let est = attitude_from_vector_pairs(&pairs).unwrap();
        prop_assert!(est.angle_to(&c) < 1e-10);
    }
}

#[test]
fn worked_examples() {
    let points =
        [Vec3::new(3.0, 2.0, 3.0), Vec3::new(1.0, 4.0, 3.0), Vec3::new(1.0, 2.0, 5.0), Vec3::new(1.0, 2.0, 1.0)];
    let x = point_from_spheres(&points, 2.0).unwrap().point().unwrap();
    assert!((x - Vec3::new(1.0, 2.0, 3.0)).norm() < 1e-12);

    let (p, m) = cross_solve_with_norm(&Vec3::new(0.0, 0.0, 2.0), &Vec3::new(0.0, 2.0, 0.0), 2f64.sqrt()).unwrap();
    let mut got = [p, m];
    got.sort_by(|a, b| b.z.total_cmp(&a.z));
    assert!((got[0] - Vec3::new(1.0, 0.0, 1.0)).norm() < 1e-12);
    assert!((got[1] - Vec3::new(1.0, 0.0, -1.0)).norm() < 1e-12);

    assert!(matches!(
        cross_solve_with_norm(&Vec3::z(), &Vec3::new(0.0, 2.0, 0.0), 1.0),
        Err(AttitudeError::NormInfeasible(_))
    ));

    let m = Vec3::new(1.0, 2.0, 3.0);
    let est =
        constant_vector_from_cross(&[(Vec3::x(), Vec3::x().cross(&m)), (Vec3::y(), Vec3::y().cross(&m))]).unwrap();
    assert!((est - m).norm() < 1e-12);
}

#[test]
fn coincident_points_leave_a_sphere() {
    let p = Vec3::new(1.0, -2.0, 0.5);
    let sol = point_from_spheres(&[p, p, p, p], 3.0).unwrap();
    assert_eq!(sol.rank, 0);
    assert!(matches!(sol.locus, SphereLocus::Sphere { .. }));
    assert!(sol.point().is_none());
}

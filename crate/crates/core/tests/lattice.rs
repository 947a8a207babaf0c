use proptest::prelude::*;
use soslab::lattice::*;

#[test]
fn box_boundary_has_no_corners() {
    let b = LatticeBox::unit_origin(4, 3).unwrap();
    let ring = b.exterior_boundary();
    assert_eq!(ring.len(), 2 * (4 + 3));
    assert!(!ring.contains(&Site::new(0, 0)));
    assert!(ring.iter().all(|s| !b.contains(*s)));
    assert!(LatticeBox::unit_origin(0, 3).is_err());
}

#[test]
fn dual_point_validation() {
    assert!(DualPoint::from_doubled(1, 3).is_ok());
    assert!(DualPoint::from_doubled(2, 3).is_err());
    assert_eq!(DualPoint::from_f64(0.5, -1.5).unwrap(), DualPoint::from_doubled(1, -3).unwrap());
    assert!(DualPoint::from_f64(0.25, 0.5).is_err());
    let a = DualPoint::from_doubled(1, 1).unwrap();
    assert!(DualBond::new(a, a.step(Dir::R)).is_ok());
    assert!(DualBond::new(a, a.step(Dir::R).step(Dir::U)).is_err());
}

#[test]
fn cone_apertures() {
    assert!(Cone::new(ConeKind::Forward, Rational::new(0, 1).unwrap()).is_err());
    let half = Cone::new(ConeKind::Forward, Rational::new(1, 2).unwrap()).unwrap();
    assert!(half.contains_delta(4, 2) && !half.contains_delta(4, 3));
    assert!(in_cone(Site::new(0, 0), Site::new(-3, 3), &Cone::BACKWARD));
    assert!(!in_cone(Site::new(0, 0), Site::new(-3, 3), &Cone::FORWARD));
}

proptest! {
    #[test]
    fn box_index_is_a_bijection(ox in -20i64..20, oy in -20i64..20, w in 1i64..12, h in 1i64..12, k in 0usize..144) {
        let b = LatticeBox::new(Site::new(ox, oy), w, h).unwrap();
        let k = k % b.len();
        let s = b.site(k);
        prop_assert!(b.contains(s));
        prop_assert_eq!(b.index(s), Some(k));
    }

    #[test]
    fn dual_origin_map_round_trip(x in -1000i64..1000, y in -1000i64..1000) {
        let s = Site::new(x, y);
        prop_assert_eq!(dual_origin_map(dual_origin_unmap(s)), s);
    }

    #[test]
    fn dir_algebra(i in 0usize..4) {
        let d = Dir::ALL[i];
        prop_assert_eq!(d.opposite().opposite(), d);
        prop_assert_eq!(Dir::from_delta(d.delta().x, d.delta().y), Some(d));
        prop_assert_eq!(Dir::from_letter(d.letter()), Some(d));
        let p = DualPoint::from_doubled(3, -5).unwrap();
        prop_assert_eq!(p.dir_to(p.step(d)), Some(d));
    }

    #[test]
    fn forward_and_backward_cones_mirror(dx in -50i64..50, dy in -50i64..50, num in 1i64..5, den in 5i64..9) {
        let r = Rational::new(num, den).unwrap();
        let f = Cone::new(ConeKind::Forward, r).unwrap();
        let b = Cone::new(ConeKind::Backward, r).unwrap();
        prop_assert_eq!(f.contains_delta(dx, dy), b.contains_delta(-dx, dy));
        prop_assert_eq!(f.contains_delta(dx, dy), f.contains_delta(dx, -dy));
        // Oracle: real-number comparison.
        prop_assert_eq!(f.contains_delta(dx, dy), (dy.abs() as f64) <= r.to_f64() * dx as f64 + 1e-12);
    }
}

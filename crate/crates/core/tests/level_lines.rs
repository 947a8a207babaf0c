use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use soslab::lattice::{DualPoint, LatticeBox, Site};
use soslab::level_lines::*;
use soslab::sos::{BoundaryCondition, HeightField};
use std::collections::BTreeSet;

fn random_field(seed: u64, w: i64, h: i64, beta: f64, floor: bool, bc: BoundaryCondition) -> HeightField {
    let bx = LatticeBox::unit_origin(w, h).unwrap();
    let mut f = HeightField::new(bx, &bc, floor, beta, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..10 {
        f.sweep(&mut rng);
    }
    f
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // Every separating bond lies on exactly one contour.
    #[test]
    fn contours_partition_bonds(seed in 0u64..10_000, w in 3i64..12, h in 3i64..12, level in 0i64..3) {
        let f = random_field(seed, w, h, 0.4, false, BoundaryCondition::Dobrushin0111);
        let bonds: Vec<_> = separating_bonds(&f, level).into_iter().map(|b| b.unoriented()).collect();
        let set: BTreeSet<_> = bonds.iter().cloned().collect();
        prop_assert_eq!(set.len(), bonds.len());
        let mut seen = BTreeSet::new();
        for c in extract_level_lines(&f, level).unwrap() {
            for b in c.bonds() {
                prop_assert!(seen.insert(b.unoriented()), "bond used twice");
            }
            let back = Contour::deserialize(&c.serialize()).unwrap();
            prop_assert_eq!(back.bonds().len(), c.bonds().len());
        }
        prop_assert_eq!(seen, set);
    }

    // With 0,1,1,1 boundary exactly one level-1 contour is open, and it
    // joins the two bottom corners.
    #[test]
    fn dobrushin_open_contour(seed in 0u64..10_000, w in 2i64..12, h in 2i64..12) {
        let f = random_field(seed, w, h, 0.6, false, BoundaryCondition::Dobrushin0111);
        let c = open_one_contour(&f, 1).unwrap();
        let ends: BTreeSet<DualPoint> = [c.start(), c.end()].into_iter().collect();
        let corners: BTreeSet<DualPoint> = [DualPoint::from_doubled(1, 1).unwrap(), DualPoint::from_doubled(2 * w + 1, 1).unwrap()].into_iter().collect();
        prop_assert_eq!(ends, corners);
        let p = displacement_profile(&c);
        prop_assert_eq!(p.x_range, (0, w));
        prop_assert!(p.rho_min.iter().all(|(x, v)| *v <= p.rho_max[x]));
        let area = area_below(&c, f.bx());
        prop_assert!(area <= (w * h) as u64);
    }

    // Oracle for the enclosure test: a rectangle of raised sites.
    #[test]
    fn rectangle_loop(x0 in 1i64..4, y0 in 1i64..4, a in 1i64..5, b in 1i64..5) {
        let bx = LatticeBox::unit_origin(10, 10).unwrap();
        let mut f = HeightField::new(bx, &BoundaryCondition::Constant(0), true, 1.0, 0).unwrap();
        for s in bx.sites() {
            if s.x >= x0 && s.x < x0 + a && s.y >= y0 && s.y < y0 + b {
                f.set(s, 1).unwrap();
            }
        }
        let ls = extract_level_lines(&f, 1).unwrap();
        prop_assert_eq!(ls.len(), 1);
        let c = &ls[0];
        prop_assert!(c.is_closed());
        prop_assert_eq!(c.len() as i64, 2 * (a + b));
        let inside = bx.sites().filter(|&s| c.encloses(s)).count() as i64;
        prop_assert_eq!(inside, a * b);
        prop_assert_eq!(c.is_macroscopic(10.0), (2 * (a + b)) as f64 >= 10f64.ln().powi(2));
        let p = displacement_profile(c);
        prop_assert_eq!(p.min_over(x0, x0 + a - 1), Some(y0 - 1));
        prop_assert_eq!(p.max_over(x0, x0 + a - 1), Some(y0 + b - 1));
    }
}

#[test]
fn extreme_open_contours() {
    let bx = LatticeBox::unit_origin(5, 4).unwrap();
    let hi = HeightField::new(bx, &BoundaryCondition::Dobrushin0111, false, 1.0, 1).unwrap();
    let c = open_one_contour(&hi, 1).unwrap();
    assert_eq!(c.len(), 5);
    assert_eq!(area_below(&c, &bx), 0);
    let lo = HeightField::new(bx, &BoundaryCondition::Dobrushin0111, false, 1.0, 0).unwrap();
    let c = open_one_contour(&lo, 1).unwrap();
    assert_eq!(c.len(), 5 + 2 * 4);
    assert_eq!(area_below(&c, &bx), 20);
    let flat = HeightField::new(bx, &BoundaryCondition::Constant(0), true, 1.0, 0).unwrap();
    assert!(matches!(open_one_contour(&flat, 1), Err(soslab::Error::Ambiguity(0))));
    assert!(extract_level_lines(&flat, 0).is_err());
}

#[test]
fn serialization_format() {
    let c = Contour::from_vertices(
        vec![DualPoint::from_doubled(1, 1).unwrap(), DualPoint::from_doubled(3, 1).unwrap(), DualPoint::from_doubled(3, 3).unwrap()],
        false,
    )
    .unwrap();
    assert_eq!(c.serialize(), "1 1 3 1\n3 1 3 3\n");
    assert!(Contour::deserialize("1 1 4 1\n").is_err());
    assert!(!c.encloses(Site::new(1, 1)));
}

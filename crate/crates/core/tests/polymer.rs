use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use soslab::cone::random_path;
use soslab::lattice::{Dir, Site, Translate};
use soslab::polymer::*;

// All words of length ≤ max_len, filtered by admissibility: an oracle for the
// pruned enumeration behind the partition function.
fn brute_force(x: Site, beta: f64, constraint: Domain, max_len: usize) -> (u64, f64) {
    let mut n = 0;
    let mut z = 0.0;
    for len in 1..=max_len {
        for code in 0..4usize.pow(len as u32) {
            let mut c = code;
            let steps: Vec<Dir> = (0..len)
                .map(|_| {
                    let d = Dir::ALL[c % 4];
                    c /= 4;
                    d
                })
                .collect();
            let p = Path::new(Site::new(0, 0), steps);
            if p.end() == x && constraint.contains_path(&p) && p.is_admissible() {
                n += 1;
                z += (-beta * len as f64).exp();
            }
        }
    }
    (n, z)
}

#[test]
fn partition_function_matches_brute_force() {
    let cases = [
        (Site::new(1, 0), Domain::Plane),
        (Site::new(2, 0), Domain::HalfPlane),
        (Site::new(1, 1), Domain::Plane),
        (Site::new(0, 1), Domain::Square(2)),
    ];
    for (x, dom) in cases {
        let r = partition_function(x, &Decoration::zero(1.3), Weighting::Free, dom, None, 7).unwrap();
        let (n, z) = brute_force(x, 1.3, dom, 7);
        assert_eq!(r.n_paths, n, "{x:?} {dom:?}");
        assert!((r.log_g - z.ln()).abs() < 1e-12, "{x:?}: {} vs {}", r.log_g, z.ln());
        assert!(r.log_tail_bound.is_finite());
    }
    assert!(partition_function(Site::new(0, 0), &Decoration::zero(1.0), Weighting::Free, Domain::Plane, None, 4).is_err());
    assert!(partition_function(Site::new(1, 0), &Decoration::zero(1.0), Weighting::Free, Domain::Plane, None, 31).is_err());
}

#[test]
fn column_oracle_value() {
    let o = ColumnOracle::new(2.0, 14).unwrap();
    let tau = o.tau([1.0, 0.0]).unwrap();
    assert!((tau - 1.7268442843687422).abs() < 1e-9, "{tau}");
    let rows = surface_tension(Site::new(1, 0), &Decoration::zero(2.0), &[1, 2, 3], TENSION_SLACK).unwrap();
    let ex = rows.iter().find(|r| r.extrapolated).unwrap();
    assert!((ex.value - tau).abs() < 1e-3, "{} vs {tau}", ex.value);
    // Finite-N values sit above the limit (log N / N correction).
    assert!(rows.iter().filter(|r| !r.extrapolated).all(|r| r.value > tau));
}

#[test]
fn modification_in_plane_is_free() {
    let deco = Decoration::single_site(2.0, 0.6, 0.002).unwrap();
    let p = Path::from_word(Site::new(0, 0), "RRURRDR").unwrap();
    let a = free_weight(&p, &deco).log_weight;
    let b = modified_weight(&p, &deco, Domain::Plane).log_weight;
    assert!((a - b).abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn path_round_trips(seed in 0u64..100_000, len in 1usize..24) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_path(&mut rng, len);
        prop_assert!(p.is_admissible());
        prop_assert_eq!(Path::from_word(p.start, &p.word()).unwrap(), p.clone());
        let c = p.to_contour().unwrap();
        prop_assert_eq!(Path::from_contour(&c), p.clone());
        let k = p.len() / 2;
        prop_assert_eq!(p.slice(0, k).concat(&p.slice(k, p.len())).unwrap(), p);
    }

    #[test]
    fn weights_translation_invariant(seed in 0u64..100_000, dx in -5i64..5, dy in -5i64..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_path(&mut rng, 14);
        let deco = Decoration::single_site(1.5, 0.6, 0.01).unwrap();
        let a = free_weight(&p, &deco).log_weight;
        let b = free_weight(&p.translate(Site::new(dx, dy)), &deco).log_weight;
        prop_assert!((a - b).abs() < 1e-12);
        let z = free_weight(&p, &Decoration::zero(1.5)).log_weight;
        prop_assert!((z + 1.5 * p.len() as f64).abs() < 1e-12);
    }
}

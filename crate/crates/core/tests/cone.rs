use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use soslab::cone::*;
use soslab::lattice::{Site, Translate};
use soslab::polymer::{animal_weight, positive_transform, Animal, Decoration, PositiveDecoration};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn decomposition_reconstructs_and_factorizes(seed in 0u64..100_000, deco_seed in 0u64..50, p in 0.0f64..0.6) {
        let deco = Decoration::synthetic(1.2, 1.0, 8, 1.0, deco_seed).unwrap();
        let pd = positive_transform(&deco);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_animal(&mut rng, &pd, 20, p);
        let d = decompose(&a);
        prop_assert_eq!(d.reconstruct().unwrap(), a.clone());
        let whole = animal_weight(&a, &pd, None).unwrap();
        let parts = pieces_log_weight(&d, &pd).unwrap();
        prop_assert!((whole - parts).abs() < 1e-9, "{} vs {}", whole, parts);
        // Cone points are the cut points, in order along the contour.
        let vs = a.path.vertices();
        let mut last = 0;
        for cp in &d.cone_points {
            let i = vs.iter().position(|v| v == cp).unwrap();
            prop_assert!(i >= last);
            last = i;
        }
        if !d.unsplittable {
            for m in &d.middle {
                prop_assert!(is_irreducible(m));
                prop_assert!(is_irreducible(&m.translate(Site::new(3, -2))));
                prop_assert!(decompose(m).middle.len() == 1);
            }
        }
    }

    #[test]
    fn step_csv_round_trip(beta in 1.5f64..3.0, cutoff in 3usize..8) {
        let (st, tm) = step_distribution_zero(beta, [1.0, 0.0], cutoff).unwrap();
        let back = StepDistribution::from_csv(&st.to_csv()).unwrap();
        prop_assert_eq!(back.masses.len(), st.masses.len());
        prop_assert!((back.total_mass - st.total_mass).abs() < 1e-12);
        let norm: f64 = st.normalized().iter().map(|(_, p)| p).sum();
        prop_assert!((norm - 1.0).abs() < 1e-12);
        prop_assert!(st.masses.iter().all(|(v, p)| *p > 0.0 && v.x >= 1 && v.y.abs() <= v.x));
        // Tail masses shrink with the horizontal cutoff.
        prop_assert!(st.tail_mass(2) <= st.tail_mass(1) + 1e-15);
        prop_assert!(tm.mass_from_length(cutoff) <= tm.mass_from_length(1) + 1e-15);
    }
}

#[test]
fn irreducible_weights_are_length_penalties() {
    let pd = PositiveDecoration::direct(Decoration::zero(1.7)).unwrap();
    let all = enumerate_irreducible(&pd, 5, 0).unwrap();
    assert!(!all.is_empty());
    for (a, w) in &all {
        assert!(is_irreducible(a));
        assert!(a.clusters.is_empty());
        assert!((w + 1.7 * a.path.len() as f64).abs() < 1e-12);
    }
    assert!(enumerate_irreducible(&pd, IRREDUCIBLE_MAX_LEN + 1, 0).is_err());
    assert!(!is_irreducible(&Animal::bare(soslab::polymer::Path::from_word(Site::new(0, 0), "RRR").unwrap())));
}

#[test]
fn hitting_identity_beta_two() {
    let (_, tm) = step_distribution_zero(2.0, [1.0, 0.0], 8).unwrap();
    for (u, v) in [(Site::new(1, 0), Site::new(2, 0)), (Site::new(0, 0), Site::new(3, 1))] {
        let (walk, animals) = hitting_identity_check(&tm, 2.0, u, v);
        assert!(walk > 0.0);
        assert!((walk - animals).abs() <= 1e-12 * walk.max(1e-300), "{walk} {animals}");
    }
}

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use soslab::cone::StepDistribution;
use soslab::lattice::Site;
use soslab::walk::*;

// Direct recursion over every path: an oracle for the column DP.
fn brute_hit(masses: &[(Site, f64)], p: Site, n: i64, v: i64) -> f64 {
    if p.y < 0 {
        return 0.0;
    }
    if p.x >= n {
        return if p.x == n && p.y == v { 1.0 } else { 0.0 };
    }
    masses.iter().map(|&(d, m)| m * brute_hit(masses, p + d, n, v)).sum()
}

fn law_strategy() -> impl Strategy<Value = Vec<(Site, f64)>> {
    prop::collection::vec(((1i64..3, -2i64..3), 0.05f64..1.0), 1..5).prop_map(|v| {
        let mut m: Vec<(Site, f64)> = v.into_iter().map(|((x, y), p)| (Site::new(x, y), p)).collect();
        m.sort_by_key(|e| e.0);
        m.dedup_by_key(|e| e.0);
        m
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hitting_dp_matches_brute_force(masses in law_strategy(), u in 0i64..3, v in 0i64..3, n in 0usize..7) {
        let st = StepDistribution::custom(masses).unwrap();
        let norm = st.normalized();
        let exact = brute_hit(&norm, Site::new(0, u), n as i64, v);
        let dp = hitting_probability_dp(&st, u, v, n).unwrap();
        prop_assert!((exact - dp).abs() < 1e-12, "{} vs {}", exact, dp);
        let table = BridgeTable::new(&st, u, v, n).unwrap();
        prop_assert!((table.prob(0, u) - dp).abs() < 1e-12);
    }

    #[test]
    fn bridges_stay_positive(seed in 0u64..100_000, u in 0i64..4, v in 0i64..4, n in 1usize..40) {
        prop_assume!((u - v).unsigned_abs() as usize <= n);
        let st = unit_column_step(&vec![(-1, 0.25), (0, 0.5), (1, 0.25)]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = conditioned_bridge(&st, u, v, n, &mut rng, BridgeMethod::DpBackward).unwrap();
        prop_assert_eq!(b.start, Site::new(0, u));
        prop_assert_eq!(b.end(), Site::new(n as i64, v));
        prop_assert!(b.positions.iter().all(|p| p.y >= 0));
        prop_assert_eq!(b.positions.len(), n + 1);
        let r = rescale(&b, n, 0.5f64.sqrt()).unwrap();
        prop_assert!((r.times[n] - 1.0).abs() < 1e-15);
        prop_assert!(r.values.iter().all(|&x| x >= 0.0));
    }
}

#[test]
fn bridge_first_step_frequencies() {
    // h-transform: P(first step d) = m(d) h(1, u + d) / h(0, u).
    let st = unit_column_step(&ssrw_1d());
    let (u, v, n) = (1, 1, 10);
    let t = BridgeTable::new(&st, u, v, n).unwrap();
    let p_up = 0.5 * t.prob(1, 2) / t.prob(0, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let trials = 20_000;
    let ups = (0..trials)
        .filter(|_| conditioned_bridge(&st, u, v, n, &mut rng, BridgeMethod::DpBackward).unwrap().steps[0].y == 1)
        .count();
    let freq = ups as f64 / trials as f64;
    assert!((freq - p_up).abs() < 4.0 * (p_up * (1.0 - p_up) / trials as f64).sqrt(), "{freq} vs {p_up}");
    let rej = conditioned_bridge(&st, u, v, n, &mut rng, BridgeMethod::Rejection).unwrap();
    assert_eq!(rej.end(), Site::new(10, 1));
    assert!(conditioned_bridge(&st, 0, 1, 2, &mut rng, BridgeMethod::DpBackward).is_err());
}

#[test]
fn doney_profiles() {
    // Nearest-neighbour centred walks: V(a) = a exactly.
    for law in [ssrw_1d(), vec![(-1, 0.2), (0, 0.6), (1, 0.2)]] {
        let v = doney_v1(&law, 30, false).unwrap();
        for a in 1..=30 {
            assert!((v.at(a) - a as f64).abs() < 1e-8, "{a}: {}", v.at(a));
        }
        assert_eq!(v.at(0), 0.0);
    }
    // A skewed centred law: harmonic, increasing, asymptotically linear.
    let law = vec![(-1, 2.0 / 3.0), (2, 1.0 / 3.0)];
    let v = doney_v1(&law, 40, false).unwrap();
    assert!(v.max_residual() < 1e-8);
    assert!((1..40).all(|a| v.at(a + 1) > v.at(a)));
    assert!((v.at(40) - v.at(39) - 1.0).abs() < 1e-6);
    let w = doney_v1(&law, 40, true).unwrap();
    assert!(w.reversed && w.max_residual() < 1e-8);
    assert!(doney_v1(&vec![(-1, 0.3), (1, 0.7)], 10, false).is_err());
}

#[test]
fn ks_statistics() {
    let s: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
    assert!((ks_one_sample(&s, |x| x.clamp(0.0, 1.0)) - 0.005).abs() < 1e-12);
    assert_eq!(ks_two_sample(&s, &s), 0.0);
    let a: Vec<f64> = (0..100).map(f64::from).collect();
    let b: Vec<f64> = (10..110).map(f64::from).collect();
    assert!((ks_two_sample(&a, &b) - 0.1).abs() < 1e-12);
    assert!(ks_p_value(0.0, 100, 100) > 0.999);
    assert!(ks_p_value(0.5, 100, 100) < 1e-6);
    assert_eq!(lattice_span(&ssrw_1d()), 2);
    assert_eq!(lattice_span(&geometric_1d(0.3, 4)), 1);
}

mod common;

use common::{brute_force_u, exact_permutation_p};
use pgls_core::stats::mann_whitney_u;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn u_matches_pair_counting_on_random_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..200 {
        let na = rng.gen_range(1..=12);
        let nb = rng.gen_range(1..=12);
        let a: Vec<f64> = (0..na).map(|_| rng.gen_range(0..10) as f64).collect();
        let b: Vec<f64> = (0..nb).map(|_| rng.gen_range(0..10) as f64).collect();
        let r = mann_whitney_u(&a, &b).unwrap();
        assert_eq!(r.u, brute_force_u(&a, &b));
        assert_eq!(r.u + mann_whitney_u(&b, &a).unwrap().u, (na * nb) as f64);
    }
}

#[test]
fn normal_approximation_tracks_exact_p_for_small_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for na in 3..=6 {
        for nb in 3..=6 {
            for _ in 0..20 {
                let mut pool: Vec<f64> = (0..na + nb).map(|v| v as f64).collect();
                pool.shuffle(&mut rng);
                let (a, b) = pool.split_at(na);
                let approx = mann_whitney_u(a, b).unwrap().p_value;
                let exact = exact_permutation_p(a, b);
                worst = worst.max((approx - exact).abs());
            }
        }
    }
    assert!(worst <= 0.05, "{worst}");
}

#[test]
fn complete_separation_of_fifty() {
    let a: Vec<f64> = (0..50).map(f64::from).collect();
    let b: Vec<f64> = (100..150).map(f64::from).collect();
    let r = mann_whitney_u(&a, &b).unwrap();
    assert_eq!(r.u, 0.0);
    assert!(r.p_value < 0.001);
}

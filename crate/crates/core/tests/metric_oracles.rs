use cfair::metrics::{abroca, auroc, kde_with_bandwidth, madd, median_heuristic, mmd_rbf, wasserstein1};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::{all_pairs_auroc, fine_grid_madd, naive_mmd, sorted_pairing};

/// Quantile-function integral on a fine grid, for unequal sizes.
fn quantile_integral(a: &[f64], b: &[f64], steps: usize) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let q = |s: &[f64], t: f64| s[((t * s.len() as f64).floor() as usize).min(s.len() - 1)];
    (0..steps)
        .map(|k| {
            let t = (k as f64 + 0.5) / steps as f64;
            (q(&a, t) - q(&b, t)).abs()
        })
        .sum::<f64>()
        / steps as f64
}

fn sample(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

#[test]
fn wasserstein_equals_sorted_pairing_bit_for_bit() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [1, 2, 7, 100, 1000] {
        let a = sample(&mut rng, n, -3.0, 3.0);
        let b = sample(&mut rng, n, -1.0, 5.0);
        assert_eq!(wasserstein1(&a, &b).unwrap(), sorted_pairing(&a, &b), "n = {n}");
    }
}

#[test]
fn wasserstein_unequal_sizes_match_quantile_integral() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let a = sample(&mut rng, 30, 0.0, 1.0);
    let b = sample(&mut rng, 45, 0.5, 2.0);
    // 90 = lcm(30, 45); midpoints of a multiple of it hit every segment exactly
    let oracle = quantile_integral(&a, &b, 90 * 50);
    assert!((wasserstein1(&a, &b).unwrap() - oracle).abs() < 1e-12);
}

#[test]
fn wasserstein_of_a_shift_is_the_shift() {
    let a: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
    let b: Vec<f64> = a.iter().map(|v| v + 0.75).collect();
    assert!((wasserstein1(&a, &b).unwrap() - 0.75).abs() < 1e-12);
}

#[test]
fn mmd_matches_naive_double_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (na, nb) in [(1, 1), (5, 9), (60, 40), (200, 150)] {
        let a = sample(&mut rng, na, 0.0, 1.0);
        let b = sample(&mut rng, nb, 0.2, 1.5);
        let got = mmd_rbf(&a, &b).unwrap();
        let want = naive_mmd(&a, &b);
        assert!((got - want).abs() < 1e-10, "{na}x{nb}: {got} vs {want}");
    }
}

#[test]
fn mmd_bandwidth_falls_back_to_one_for_constant_samples() {
    assert_eq!(median_heuristic(&[2.0, 2.0], &[2.0]), 1.0);
    assert_eq!(mmd_rbf(&[2.0, 2.0], &[2.0]).unwrap(), 0.0);
}

#[test]
fn auroc_matches_all_pairs_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in [4, 25, 300] {
        // coarse scores force ties
        let scores: Vec<f64> = (0..n).map(|_| (rng.random_range(0.0..1.0_f64) * 10.0).round() / 10.0).collect();
        let mut labels: Vec<bool> = (0..n).map(|_| rng.random_bool(0.4)).collect();
        labels[0] = true;
        labels[1] = false;
        let got = auroc(&scores, &labels).unwrap();
        assert!((got - all_pairs_auroc(&scores, &labels)).abs() < 1e-12);
    }
}

#[test]
fn madd_matches_fine_grid_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = sample(&mut rng, 300, 0.1, 0.7);
    let b = sample(&mut rng, 200, 0.3, 0.95);
    let got = madd(&a, &b).unwrap();
    let want = fine_grid_madd(&a, &b, 1_000_001);
    assert!((got - want).abs() < 1e-3, "{got} vs {want}");
}

#[test]
fn madd_is_bounded_by_two_for_disjoint_groups() {
    let a = vec![0.02, 0.03, 0.04, 0.05];
    let b = vec![0.95, 0.96, 0.97, 0.98];
    let v = madd(&a, &b).unwrap();
    assert!(v > 1.9 && v <= 2.0 + 1e-12, "{v}");
}

#[test]
fn kde_integrates_to_one_on_a_wide_grid() {
    let s = [0.0, 0.3, 1.1, 2.0];
    let grid: Vec<f64> = (0..4001).map(|k| -5.0 + k as f64 * 0.0025).collect();
    let c = kde_with_bandwidth(&s, &grid, 0.4).unwrap();
    assert!((c.integral() - 1.0).abs() < 1e-6);
}

#[test]
fn abroca_is_zero_for_identical_groups_and_bounded() {
    let s = [0.1, 0.4, 0.35, 0.8, 0.7, 0.2];
    let l = [false, false, true, true, true, false];
    assert_eq!(abroca(&s, &l, &s, &l).unwrap(), 0.0);
    let flipped: Vec<bool> = l.iter().map(|v| !v).collect();
    let v = abroca(&s, &l, &s, &flipped).unwrap();
    assert!(v > 0.0 && v <= 1.0);
}

proptest! {
    #[test]
    fn wasserstein_is_symmetric_nonnegative_and_zero_on_self(
        a in prop::collection::vec(-100.0..100.0f64, 1..40),
        b in prop::collection::vec(-100.0..100.0f64, 1..40),
    ) {
        let ab = wasserstein1(&a, &b).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(ab, wasserstein1(&b, &a).unwrap());
        prop_assert_eq!(wasserstein1(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn wasserstein_ignores_sample_order(mut a in prop::collection::vec(-10.0..10.0f64, 2..30), b in prop::collection::vec(-10.0..10.0f64, 1..30)) {
        let before = wasserstein1(&a, &b).unwrap();
        a.reverse();
        prop_assert_eq!(before, wasserstein1(&a, &b).unwrap());
    }

    #[test]
    fn wasserstein_satisfies_triangle_inequality(
        a in prop::collection::vec(-5.0..5.0f64, 1..20),
        b in prop::collection::vec(-5.0..5.0f64, 1..20),
        c in prop::collection::vec(-5.0..5.0f64, 1..20),
    ) {
        let ac = wasserstein1(&a, &c).unwrap();
        let via = wasserstein1(&a, &b).unwrap() + wasserstein1(&b, &c).unwrap();
        prop_assert!(ac <= via + 1e-9);
    }

    #[test]
    fn mmd_is_symmetric_and_zero_on_self(
        a in prop::collection::vec(-10.0..10.0f64, 1..30),
        b in prop::collection::vec(-10.0..10.0f64, 1..30),
    ) {
        let ab = mmd_rbf(&a, &b).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(ab, mmd_rbf(&b, &a).unwrap());
        prop_assert!(mmd_rbf(&a, &a).unwrap() < 1e-7);
    }

    #[test]
    fn abroca_is_symmetric_and_within_unit_interval(
        sa in prop::collection::vec(0.0..1.0f64, 4..30),
        sb in prop::collection::vec(0.0..1.0f64, 4..30),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut la: Vec<bool> = sa.iter().map(|_| rng.random_bool(0.5)).collect();
        let mut lb: Vec<bool> = sb.iter().map(|_| rng.random_bool(0.5)).collect();
        la[0] = true; la[1] = false; lb[0] = true; lb[1] = false;
        let ab = abroca(&sa, &la, &sb, &lb).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        prop_assert!((ab - abroca(&sb, &lb, &sa, &la).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn madd_is_symmetric_and_within_zero_two(
        a in prop::collection::vec(0.0..1.0f64, 2..40),
        b in prop::collection::vec(0.0..1.0f64, 2..40),
    ) {
        let ab = madd(&a, &b).unwrap();
        prop_assert!((0.0..=2.0 + 1e-9).contains(&ab));
        prop_assert!((ab - madd(&b, &a).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn auroc_agrees_with_pair_counting(
        scores in prop::collection::vec(0u8..6, 4..40),
        seed in any::<u64>(),
    ) {
        let s: Vec<f64> = scores.iter().map(|&v| v as f64 / 5.0).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut l: Vec<bool> = s.iter().map(|_| rng.random_bool(0.5)).collect();
        l[0] = true; l[1] = false;
        prop_assert!((auroc(&s, &l).unwrap() - all_pairs_auroc(&s, &l)).abs() < 1e-12);
    }
}

use croann::operators::{decomposition, initial_gen, neighbour, synthesis, OperatorParams};
use croann::slfn::NetworkConfig;
use croann::structure::Encoding;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn changed(a: &[f64], b: &[f64]) -> Vec<bool> {
    a.iter().zip(b).map(|(x, y)| x != y).collect()
}

#[test]
fn neighbour_index_is_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let base = vec![0.0; 10];
    let mut counts = [0u32; 10];
    let draws = 20_000;
    for _ in 0..draws {
        let n = neighbour(&base, &OperatorParams::default(), &mut rng);
        let idx: Vec<usize> = (0..10).filter(|&i| n[i] != 0.0).collect();
        assert_eq!(idx.len(), 1);
        counts[idx[0]] += 1;
    }
    let expected = draws as f64 / 10.0;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    // 99.9th percentile of chi-square with 9 degrees of freedom
    assert!(chi2 < 27.88, "chi2 = {chi2}, counts = {counts:?}");
}

#[test]
fn perturbation_variance_matches_setting() {
    for variance in [0.01, 0.1, 1.0] {
        let params = OperatorParams {
            gaussian_variance: variance,
            ..OperatorParams::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let deltas: Vec<f64> = (0..40_000)
            .map(|_| neighbour(&vec![0.0], &params, &mut rng)[0])
            .collect();
        let n = deltas.len() as f64;
        let mean = deltas.iter().sum::<f64>() / n;
        let var = deltas.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 4.0 * (variance / n).sqrt(), "mean {mean}");
        assert!(
            (var / variance - 1.0).abs() < 0.03,
            "variance {var} for setting {variance}"
        );
    }
}

#[test]
fn decomposition_masks_are_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let base = vec![0.0; 40];
    let (mut first, mut both, mut total) = (0u64, 0u64, 0u64);
    for _ in 0..5_000 {
        let (a, b) = decomposition(&base, &OperatorParams::default(), &mut rng);
        for (x, y) in changed(&base, &a).into_iter().zip(changed(&base, &b)) {
            first += x as u64;
            both += (x && y) as u64;
            total += 1;
        }
    }
    let p1 = first as f64 / total as f64;
    let p12 = both as f64 / total as f64;
    assert!((p1 - 0.5).abs() < 0.01, "per-element rate {p1}");
    assert!((p12 - 0.25).abs() < 0.01, "joint rate {p12}");
}

#[test]
fn synthesis_draws_half_from_each_parent() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let a = vec![1.0; 50];
    let b = vec![-1.0; 50];
    let mut from_a = 0usize;
    for _ in 0..2_000 {
        from_a += synthesis(&a, &b, &mut rng)
            .iter()
            .filter(|&&v| v == 1.0)
            .count();
    }
    let frac = from_a as f64 / 100_000.0;
    assert!(
        (frac - 0.5).abs() < 0.01,
        "fraction from first parent {frac}"
    );
}

proptest! {
    #[test]
    fn initial_gen_spans_each_container(n0 in 1usize..8, n1 in 1usize..8, n2 in 1usize..5, seed in any::<u64>()) {
        let s = initial_gen(&NetworkConfig::new(n0, n1, n2), &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(s.values().iter().all(|v| (-1.0..=1.0).contains(v)));
        for r in s.containers() {
            let c = &s.values()[r];
            if c.len() >= 2 {
                let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                prop_assert_eq!(lo, -1.0);
                prop_assert_eq!(hi, 1.0);
            }
        }
    }

    #[test]
    fn operators_preserve_shape(n0 in 1usize..6, n1 in 1usize..6, n2 in 1usize..4, seed in any::<u64>()) {
        let cfg = NetworkConfig::new(n0, n1, n2);
        let p = OperatorParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = initial_gen(&cfg, &mut rng);
        let b = initial_gen(&cfg, &mut rng);
        let n = neighbour(&a, &p, &mut rng);
        prop_assert_eq!(changed(a.values(), n.values()).iter().filter(|&&c| c).count(), 1);
        let (d1, d2) = decomposition(&a, &p, &mut rng);
        for d in [&d1, &d2] {
            prop_assert_eq!(d.dims(), a.dims());
            prop_assert!(changed(a.values(), d.values()).iter().any(|&c| c));
        }
        let c = synthesis(&a, &b, &mut rng);
        prop_assert_eq!(c.dims(), a.dims());
        for ((x, y), z) in a.values().iter().zip(b.values()).zip(c.values()) {
            prop_assert!(z == x || z == y);
        }
    }
}

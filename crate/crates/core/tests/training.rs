use croann::data::{split_dataset, RawDataset, Row, SplitCounts};
use croann::trainer::{run_trials, train, Execution, NoProgress, StopReason, TrainSettings};

/// Two tight clusters of four points each. With six training points both
/// classes are always represented in the training portion.
fn clusters() -> RawDataset {
    let points = [
        ([0.0, 0.0], 0),
        ([0.0, 0.1], 0),
        ([0.1, 0.0], 0),
        ([0.1, 0.1], 0),
        ([1.0, 1.0], 1),
        ([1.0, 0.9], 1),
        ([0.9, 1.0], 1),
        ([0.9, 0.9], 1),
    ];
    RawDataset {
        rows: points
            .iter()
            .map(|(a, l)| Row {
                attributes: a.to_vec(),
                label: *l,
            })
            .collect(),
        class_names: vec!["left".into(), "right".into()],
        attribute_names: vec!["x".into(), "y".into()],
        dropped_rows: 0,
    }
}

const TOY_SPLIT: SplitCounts = SplitCounts::new(6, 1, 1);

fn settings(fe_limit: u64) -> TrainSettings {
    let mut s = TrainSettings::new(2, 2);
    s.cro.fe_limit = fe_limit;
    s.stopping.max_window_count = 20;
    s
}

#[test]
fn clusters_are_linearly_separable() {
    let d = clusters();
    let found = (0..360).any(|deg| {
        let t = (deg as f64).to_radians();
        let (wx, wy) = (t.cos(), t.sin());
        let proj: Vec<f64> = d
            .rows
            .iter()
            .map(|r| wx * r.attributes[0] + wy * r.attributes[1])
            .collect();
        let max0 = d
            .rows
            .iter()
            .zip(&proj)
            .filter(|(r, _)| r.label == 0)
            .map(|(_, p)| *p)
            .fold(f64::MIN, f64::max);
        let min1 = d
            .rows
            .iter()
            .zip(&proj)
            .filter(|(r, _)| r.label == 1)
            .map(|(_, p)| *p)
            .fold(f64::MAX, f64::min);
        max0 < min1
    });
    assert!(found);
}

#[test]
fn separable_data_is_learned() {
    let raw = clusters();
    let set = run_trials(
        &raw,
        TOY_SPLIT,
        &settings(5_000),
        50,
        100,
        Execution::Parallel,
        &NoProgress,
    )
    .unwrap();
    let perfect = set.reports.iter().filter(|r| r.test_error == 0.0).count();
    assert!(
        perfect >= 45,
        "only {perfect}/50 trials reached zero test error"
    );
}

#[test]
fn trials_are_deterministic_and_budgeted() {
    let raw = clusters();
    let s = settings(2_000);
    let counts = TOY_SPLIT;
    let a = run_trials(&raw, counts, &s, 8, 7, Execution::Parallel, &NoProgress).unwrap();
    let b = run_trials(&raw, counts, &s, 8, 7, Execution::Sequential, &NoProgress).unwrap();
    assert_eq!(a.reports, b.reports);
    for r in &a.reports {
        assert!(r.fe_used <= s.cro.fe_limit);
        if r.stop_reason == StopReason::FeLimit {
            assert_eq!(r.fe_used, s.cro.fe_limit);
        }
    }
}

#[test]
fn permuting_seeds_permutes_reports() {
    let raw = clusters();
    let s = settings(1_000);
    let counts = TOY_SPLIT;
    let seeds = [31u64, 4, 17, 9];
    let by_seed = |seed: u64| {
        let split = split_dataset(&raw, counts, seed).unwrap();
        train(&split, &s, seed, 0, &NoProgress).unwrap().report
    };
    let forward: Vec<_> = seeds.iter().map(|&sd| by_seed(sd)).collect();
    let reversed: Vec<_> = seeds.iter().rev().map(|&sd| by_seed(sd)).collect();
    for (f, r) in forward.iter().zip(reversed.iter().rev()) {
        assert_eq!(f, r);
    }
    let set = run_trials(&raw, counts, &s, 4, 9, Execution::Parallel, &NoProgress).unwrap();
    for (i, r) in set.reports.iter().enumerate() {
        assert_eq!(r.trial, i);
        assert_eq!(r.seed, 9 + i as u64);
        let direct = by_seed(r.seed);
        assert_eq!(
            (r.train_error, r.test_error, r.fe_used),
            (direct.train_error, direct.test_error, direct.fe_used)
        );
    }
}

#[test]
fn restored_network_scores_val_best() {
    let raw = clusters();
    let mut s = settings(20_000);
    s.stopping.max_window_count = 3;
    let counts = TOY_SPLIT;
    let mut overfit = 0;
    for seed in 0..20 {
        let split = split_dataset(&raw, counts, seed).unwrap();
        let t = train(&split, &s, seed, 0, &NoProgress).unwrap();
        if t.report.stop_reason == StopReason::Overfitness {
            overfit += 1;
            let vf = croann::slfn::fitness(&t.network, &split.validation, &s.network);
            assert_eq!(vf.to_bits(), t.val_best.unwrap().to_bits());
        }
    }
    assert!(overfit > 0);
}

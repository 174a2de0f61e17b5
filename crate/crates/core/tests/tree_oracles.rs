mod common;

use common::{as_rows, brute_force_split, random_stream, random_value, sweep_split, NaiveTree};
use forgetful::datastream::batched;
use forgetful::splitter::{impurity, min_g, Criterion, Observation};
use forgetful::tree::{ForgetfulTree, Forgetting, TreeConfig, UpdateStrategy};
use forgetful::Sample;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn entropy_of_one_to_three() {
    let h = impurity(&[0, 1, 1, 1], Criterion::Entropy).unwrap();
    assert!((h - 0.811_278_124_459_132_8).abs() < 1e-12);
}

#[test]
fn sweep_and_brute_force_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..300 {
        let s = random_stream(&mut rng, 40, 4, 3);
        let rows = as_rows(&s);
        for c in [Criterion::Entropy, Criterion::Gini] {
            assert_eq!(
                sweep_split(&rows, &[0, 1, 2, 3], 3, c),
                brute_force_split(&rows, &[0, 1, 2, 3], 3, c)
            );
        }
    }
}

#[test]
fn fresh_build_matches_naive_cart() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for case in 0..40 {
        let s = random_stream(&mut rng, 300, 6, 2 + case % 3);
        let n_classes = 2 + case % 3;
        let mut tree = ForgetfulTree::new(TreeConfig::new(n_classes));
        tree.build(&s, 7).unwrap();
        let naive = NaiveTree::fit(&as_rows(&s), &[0, 1, 2, 3, 4, 5], n_classes, Criterion::Entropy, 7);
        for x in common::probes(&mut rng, 100, 6) {
            assert_eq!(tree.predict(&x).unwrap(), naive.predict(&x));
        }
    }
}

#[test]
fn feature_subset_restricts_splits() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let s = random_stream(&mut rng, 400, 6, 2);
    let mut config = TreeConfig::new(2);
    config.features = Some(vec![4, 1]);
    let mut tree = ForgetfulTree::new(config);
    tree.build(&s, 8).unwrap();
    assert_eq!(tree.features(), &[1, 4]);
    let naive = NaiveTree::fit(&as_rows(&s), &[1, 4], 2, Criterion::Entropy, 8);
    for x in common::probes(&mut rng, 100, 6) {
        assert_eq!(tree.predict(&x).unwrap(), naive.predict(&x));
    }
}

fn stream_strategy() -> impl Strategy<Value = (u64, usize, usize, usize, usize)> {
    (any::<u64>(), 60usize..600, 2usize..6, 2usize..4, 5usize..60)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn min_g_matches_brute_force(seed in any::<u64>(), n in 2usize..40, n_features in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<(Vec<f64>, usize)> = (0..n)
            .map(|i| ((0..n_features).map(|f| random_value(&mut rng, f)).collect(), (seed as usize + i * 7) % 3))
            .collect();
        let obs: Vec<Observation<'_>> = rows
            .iter()
            .enumerate()
            .map(|(i, (x, y))| Observation { id: i as u64, features: x, label: *y })
            .collect();
        let refs: Vec<(&[f64], usize)> = rows.iter().map(|(x, y)| (x.as_slice(), *y)).collect();
        let features: Vec<usize> = (0..n_features).collect();
        let brute = brute_force_split(&refs, &features, 3, Criterion::Gini);
        match min_g(&obs, &features, 3, Criterion::Gini) {
            Ok(s) => {
                let b = brute.unwrap();
                prop_assert_eq!((s.split.feature, s.split.threshold.to_bits()), (b.feature, b.threshold.to_bits()));
            }
            Err(_) => prop_assert!(brute.is_none()),
        }
    }

    #[test]
    fn incremental_and_rebuild_strategies_agree((seed, n, n_features, n_classes, batch) in stream_strategy()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_stream(&mut rng, n, n_features, n_classes);
        let probe = common::probes(&mut rng, 50, n_features);
        let mut inc = ForgetfulTree::new(TreeConfig::new(n_classes));
        let mut reb = ForgetfulTree::new(TreeConfig { strategy: UpdateStrategy::Rebuild, ..TreeConfig::new(n_classes) });
        for b in batched(s, batch) {
            inc.partial_fit(&b).unwrap();
            reb.partial_fit(&b).unwrap();
            prop_assert_eq!(inc.n_retained(), reb.n_retained());
            for x in &probe {
                prop_assert_eq!(inc.predict(x).unwrap(), reb.predict(x).unwrap());
            }
        }
    }

    #[test]
    fn retention_bound_holds(
        (seed, n, n_features, n_classes, batch) in stream_strategy(),
        random in any::<bool>(),
        slack in 0usize..200,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_stream(&mut rng, n, n_features, n_classes);
        let mut config = TreeConfig::new(n_classes);
        config.forgetting = if random { Forgetting::Random } else { Forgetting::Oldest };
        config.seed = seed;
        let mut tree = ForgetfulTree::new(config);
        for b in batched(s, batch) {
            let before = tree.n_retained();
            let r_size = b.len() + slack;
            if tree.is_built() {
                tree.update(&b, 5, r_size).unwrap();
                prop_assert_eq!(tree.n_retained(), (before + b.len()).min(r_size));
            } else {
                tree.build(&b, 5).unwrap();
            }
            // the newest batch always survives
            let ids: Vec<u64> = tree.retained().iter().map(|x| x.id).collect();
            prop_assert!(ids.len() >= b.len());
        }
    }

    #[test]
    fn partial_fit_keeps_at_least_the_batch((seed, n, n_features, n_classes, batch) in stream_strategy()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_stream(&mut rng, n, n_features, n_classes);
        let mut tree = ForgetfulTree::new(TreeConfig::new(n_classes));
        for b in batched(s, batch) {
            let step = tree.partial_fit(&b).unwrap();
            prop_assert!(tree.n_retained() >= b.len());
            prop_assert!(step.r_size >= b.len() as f64);
            prop_assert_eq!(step.max_height, forgetful::tree::max_height_for(step.r_size));
            prop_assert!(tree.height() <= step.max_height);
        }
    }
}

#[test]
fn retained_samples_keep_arrival_order() {
    let batch = |start: u64| -> Vec<Sample> {
        (start..start + 10)
            .map(|i| Sample {
                id: i,
                features: vec![(i % 4) as f64],
                label: (i % 2) as usize,
            })
            .collect()
    };
    let mut tree = ForgetfulTree::new(TreeConfig::new(2));
    tree.build(&batch(0), 3).unwrap();
    tree.update(&batch(10), 3, 15).unwrap();
    let labels: Vec<usize> = tree.retained().iter().map(|s| s.label).collect();
    let expected: Vec<usize> = (5..20).map(|i| i % 2).collect();
    assert_eq!(labels, expected);
}

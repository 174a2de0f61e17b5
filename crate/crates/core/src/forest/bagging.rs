use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::datastream::Sample;

pub const BAGGING_LAMBDA: f64 = 6.0;
pub const MAX_REPLICATION: u64 = 10;

/// Raw `Poisson(6)` replication factor, before clamping.
pub fn draw_replication_raw<R: Rng + ?Sized>(rng: &mut R) -> u64 {
    let poisson = Poisson::new(BAGGING_LAMBDA).expect("positive lambda");
    poisson.sample(rng) as u64
}

/// Replication factor clamped to `[1, 10]`.
pub fn clamp_replication(w: u64) -> u64 {
    w.clamp(1, MAX_REPLICATION)
}

pub fn draw_replication<R: Rng + ?Sized>(rng: &mut R) -> u64 {
    clamp_replication(draw_replication_raw(rng))
}

/// Leveraging-bagging expansion: `W * |batch|` rows drawn uniformly with
/// replacement, `W ~ Poisson(6)` clamped to `[1, 10]`.
pub fn bagging_sample<R: Rng + ?Sized>(batch: &[Sample], rng: &mut R) -> Vec<Sample> {
    if batch.is_empty() {
        return Vec::new();
    }
    let w = draw_replication(rng) as usize;
    (0..w * batch.len())
        .map(|_| batch[rng.random_range(0..batch.len())].clone())
        .collect()
}

/// Sorted split-feature subset with size uniform in
/// `{floor(sqrt(n)) + 2, ..., n}`; every feature when that range is empty.
pub fn sample_feature_subset<R: Rng + ?Sized>(n_features: usize, rng: &mut R) -> Vec<usize> {
    let low = (n_features as f64).sqrt().floor() as usize + 2;
    if low > n_features {
        return (0..n_features).collect();
    }
    let size = rng.random_range(low..=n_features);
    let mut picked = index::sample(rng, n_features, size).into_vec();
    picked.sort_unstable();
    picked
}

//! The forgetful decision tree.
//!
//! The tree keeps only the newest `r_size` samples. Each batch first forgets
//! the excess oldest rows (or, for forest members, a uniform random subset of
//! the old rows), then appends the batch and walks down from the root: a node
//! whose best split is unchanged just forwards the new rows to its children,
//! otherwise the subtree under it is rebuilt from its retained rows.

mod adapt;
mod node;
mod store;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datastream::Sample;
use crate::error::{Error, Result};
use crate::splitter::{Criterion, ForgetSet, RowId};

pub use adapt::{max_height_for, r_change, AdaptState, Adaptation, DEFAULT_I_RATE, DEFAULT_WARM_SIZE};
use node::{Ctx, Node};
use store::RowStore;

/// Which old rows are dropped when the retain size is exceeded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Forgetting {
    /// Smallest (oldest) ids first.
    #[default]
    Oldest,
    /// Uniformly at random among the rows retained before the batch.
    Random,
}

/// How the tree absorbs a batch once forgetting is done.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpdateStrategy {
    /// Merge sorted orders and keep unchanged splits.
    #[default]
    Incremental,
    /// Rebuild the whole tree from the retained rows every batch.
    Rebuild,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub n_classes: usize,
    pub criterion: Criterion,
    pub initial_i_rate: f64,
    pub initial_warm_size: usize,
    pub forgetting: Forgetting,
    pub strategy: UpdateStrategy,
    /// Features eligible for splits; `None` means all of them.
    pub features: Option<Vec<usize>>,
    /// Seeds random forgetting.
    pub seed: u64,
}

impl TreeConfig {
    pub fn new(n_classes: usize) -> Self {
        TreeConfig {
            n_classes,
            criterion: Criterion::Entropy,
            initial_i_rate: DEFAULT_I_RATE,
            initial_warm_size: DEFAULT_WARM_SIZE,
            forgetting: Forgetting::Oldest,
            strategy: UpdateStrategy::Incremental,
            features: None,
            seed: 0,
        }
    }
}

/// Summary of one [`ForgetfulTree::partial_fit`] call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitStep {
    pub max_height: usize,
    pub r_size: f64,
    pub forgotten: usize,
    /// `None` on the initial build.
    pub adaptation: Option<Adaptation>,
}

#[derive(Debug, Clone)]
pub struct ForgetfulTree {
    config: TreeConfig,
    n_features: Option<usize>,
    features: Vec<usize>,
    store: RowStore,
    root: Option<Node>,
    adapt: AdaptState,
    max_height: usize,
    rng: ChaCha8Rng,
}

impl ForgetfulTree {
    pub fn new(config: TreeConfig) -> Self {
        let adapt = AdaptState::new(config.initial_i_rate, config.initial_warm_size, 0.0);
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        ForgetfulTree {
            config,
            n_features: None,
            features: Vec::new(),
            store: RowStore::default(),
            root: None,
            adapt,
            max_height: 0,
            rng,
        }
    }

    pub fn config(&self) -> &TreeConfig {
        &self.config
    }

    pub fn adapt_state(&self) -> &AdaptState {
        &self.adapt
    }

    pub(crate) fn adapt_state_mut(&mut self) -> &mut AdaptState {
        &mut self.adapt
    }

    pub fn max_height(&self) -> usize {
        self.max_height
    }

    pub fn is_built(&self) -> bool {
        self.root.is_some()
    }

    /// Features eligible for splits.
    pub fn features(&self) -> &[usize] {
        &self.features
    }

    /// Depth of the deepest leaf (0 for a single leaf).
    pub fn height(&self) -> usize {
        self.root.as_ref().map_or(0, Node::height)
    }

    pub fn n_leaves(&self) -> usize {
        self.root.as_ref().map_or(0, Node::n_leaves)
    }

    pub fn n_retained(&self) -> usize {
        self.root.as_ref().map_or(0, |r| r.retained.len())
    }

    /// Retained samples in arrival order; ids are the tree's row ids.
    pub fn retained(&self) -> Vec<Sample> {
        let Some(root) = &self.root else {
            return Vec::new();
        };
        root.retained
            .iter()
            .map(|&id| Sample {
                id,
                features: self.store.features(id).to_vec(),
                label: self.store.label(id),
            })
            .collect()
    }

    fn check_batch(&mut self, batch: &[Sample]) -> Result<()> {
        if batch.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let width = *self.n_features.get_or_insert(batch[0].features.len());
        for s in batch {
            if s.features.len() != width {
                return Err(Error::FeatureCount {
                    expected: width,
                    got: s.features.len(),
                });
            }
            if s.label >= self.config.n_classes {
                return Err(Error::LabelOutOfRange {
                    label: s.label,
                    n_classes: self.config.n_classes,
                });
            }
        }
        if self.features.is_empty() {
            self.features = match &self.config.features {
                Some(f) => {
                    let mut f = f.clone();
                    f.sort_unstable();
                    f.dedup();
                    if f.iter().any(|&i| i >= width) {
                        return Err(Error::Config(format!(
                            "feature subset {f:?} out of range for {width} features"
                        )));
                    }
                    f
                }
                None => (0..width).collect(),
            };
        }
        Ok(())
    }

    fn ctx(&self, height_changed: bool) -> Ctx<'_> {
        Ctx {
            store: &self.store,
            features: &self.features,
            n_classes: self.config.n_classes,
            criterion: self.config.criterion,
            max_height: self.max_height,
            height_changed,
        }
    }

    /// Builds the tree from scratch on `batch`, discarding anything retained.
    pub fn build(&mut self, batch: &[Sample], max_height: usize) -> Result<()> {
        self.check_batch(batch)?;
        self.store = RowStore::default();
        let ids: Vec<RowId> = batch.iter().map(|s| self.store.insert(&s.features, s.label)).collect();
        self.max_height = max_height;
        self.root = Some(Node::build(ids, 0, &self.ctx(true)));
        Ok(())
    }

    /// Forgets down to `r_size` rows including `batch`, appends `batch`, and
    /// updates the tree under `max_height`. Returns how many rows were
    /// forgotten.
    pub fn update(&mut self, batch: &[Sample], max_height: usize, r_size: usize) -> Result<usize> {
        if r_size < batch.len() {
            return Err(Error::RetainSizeTooSmall {
                r_size,
                batch: batch.len(),
            });
        }
        if self.root.is_none() {
            self.build(batch, max_height)?;
            return Ok(0);
        }
        self.check_batch(batch)?;
        let mut root = self.root.take().expect("checked above");

        let excess = (root.retained.len() + batch.len()).saturating_sub(r_size);
        let forget = match self.config.forgetting {
            _ if excess == 0 => ForgetSet::default(),
            Forgetting::Oldest => ForgetSet::new(root.retained[..excess].iter().copied()),
            Forgetting::Random => {
                let picked = index::sample(&mut self.rng, root.retained.len(), excess);
                ForgetSet::new(picked.into_iter().map(|i| root.retained[i]))
            }
        };
        let incoming: Vec<RowId> = batch.iter().map(|s| self.store.insert(&s.features, s.label)).collect();

        let height_changed = max_height != self.max_height;
        self.max_height = max_height;
        match self.config.strategy {
            UpdateStrategy::Incremental => root.update(&incoming, &forget, 0, &self.ctx(height_changed)),
            UpdateStrategy::Rebuild => {
                let mut ids: Vec<RowId> = root
                    .retained
                    .iter()
                    .copied()
                    .filter(|&id| !forget.contains(id))
                    .collect();
                ids.extend_from_slice(&incoming);
                root = Node::build(ids, 0, &self.ctx(true));
            }
        }
        for id in forget.iter() {
            self.store.remove(id);
        }
        debug_assert_eq!(self.store.len(), root.retained.len());
        self.root = Some(root);
        Ok(forget.len())
    }

    /// Test-then-train step: the first call builds with `r_size = |batch|`;
    /// later calls score the batch with the current tree, adapt the
    /// controller, then update.
    pub fn partial_fit(&mut self, batch: &[Sample]) -> Result<FitStep> {
        if batch.is_empty() {
            return Err(Error::EmptyBatch);
        }
        if self.root.is_none() {
            self.adapt.r_size = batch.len() as f64;
            let max_height = max_height_for(self.adapt.r_size);
            self.build(batch, max_height)?;
            return Ok(FitStep {
                max_height,
                r_size: self.adapt.r_size,
                forgotten: 0,
                adaptation: None,
            });
        }
        self.check_batch(batch)?;
        let correct = self.correctness(batch)?;
        let adaptation = self.adapt.adapt(&correct, self.config.n_classes)?;
        let forgotten = self.update(batch, adaptation.max_height, self.adapt.retain_count())?;
        Ok(FitStep {
            max_height: adaptation.max_height,
            r_size: self.adapt.r_size,
            forgotten,
            adaptation: Some(adaptation),
        })
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        let root = self.root.as_ref().ok_or(Error::NotBuilt)?;
        if let Some(width) = self.n_features {
            if x.len() != width {
                return Err(Error::FeatureCount {
                    expected: width,
                    got: x.len(),
                });
            }
        }
        Ok(root.predict(x))
    }

    /// Per-sample correctness of the current tree on `batch`.
    pub fn correctness(&self, batch: &[Sample]) -> Result<Vec<bool>> {
        batch
            .iter()
            .map(|s| Ok(self.predict(&s.features)? == s.label))
            .collect()
    }

    /// Fraction of `batch` predicted correctly.
    pub fn evaluate_accuracy(&self, batch: &[Sample]) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let correct = self.correctness(batch)?;
        Ok(correct.iter().filter(|&&c| c).count() as f64 / batch.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(id: u64, features: &[f64], label: usize) -> Sample {
        Sample {
            id,
            features: features.to_vec(),
            label,
        }
    }

    fn xor_batch(start: u64, n: usize) -> Vec<Sample> {
        (0..n)
            .map(|i| {
                let a = (i % 2) as f64;
                let b = ((i / 2) % 2) as f64;
                let c = ((i / 4) % 3) as f64;
                s(start + i as u64, &[a, b, c], (a as usize) ^ (b as usize))
            })
            .collect()
    }

    #[test]
    fn pure_batch_is_single_leaf() {
        let mut t = ForgetfulTree::new(TreeConfig::new(3));
        let batch: Vec<_> = (0..10).map(|i| s(i, &[i as f64], 2)).collect();
        t.build(&batch, 5).unwrap();
        assert_eq!(t.n_leaves(), 1);
        assert_eq!(t.predict(&[100.0]).unwrap(), 2);
    }

    #[test]
    fn zero_height_gives_majority_leaf() {
        let mut t = ForgetfulTree::new(TreeConfig::new(2));
        let batch = vec![s(0, &[0.0], 0), s(1, &[1.0], 1), s(2, &[2.0], 1)];
        t.build(&batch, 0).unwrap();
        assert_eq!(t.n_leaves(), 1);
        assert_eq!(t.predict(&[0.0]).unwrap(), 1);
    }

    #[test]
    fn majority_tie_goes_to_lowest_class() {
        let mut t = ForgetfulTree::new(TreeConfig::new(3));
        let batch = vec![s(0, &[0.0], 2), s(1, &[1.0], 1)];
        t.build(&batch, 0).unwrap();
        assert_eq!(t.predict(&[0.0]).unwrap(), 1);
    }

    #[test]
    fn depth_one_routes_by_threshold() {
        let mut t = ForgetfulTree::new(TreeConfig::new(2));
        let batch = vec![s(0, &[1.0], 0), s(1, &[2.0], 0), s(2, &[3.0], 1), s(3, &[4.0], 1)];
        t.build(&batch, 1).unwrap();
        assert_eq!(t.predict(&[2.5]).unwrap(), 0);
        assert_eq!(t.predict(&[2.6]).unwrap(), 1);
        assert_eq!(t.height(), 1);
    }

    #[test]
    fn empty_build_rejected() {
        let mut t = ForgetfulTree::new(TreeConfig::new(2));
        assert!(matches!(t.build(&[], 3), Err(Error::EmptyBatch)));
        assert!(matches!(t.predict(&[0.0]), Err(Error::NotBuilt)));
    }

    #[test]
    fn retain_size_smaller_than_batch_rejected() {
        let mut t = ForgetfulTree::new(TreeConfig::new(2));
        t.build(&xor_batch(0, 8), 3).unwrap();
        assert!(matches!(
            t.update(&xor_batch(8, 8), 3, 7),
            Err(Error::RetainSizeTooSmall { r_size: 7, batch: 8 })
        ));
    }

    #[test]
    fn stable_split_is_kept_and_children_grow() {
        let mut t = ForgetfulTree::new(TreeConfig::new(2));
        t.build(&xor_batch(0, 24), 4).unwrap();
        let root_split = match &t.root.as_ref().unwrap().kind {
            node::NodeKind::Internal { split, .. } => *split,
            _ => panic!("expected a split"),
        };
        t.update(&xor_batch(24, 24), 4, 1000).unwrap();
        match &t.root.as_ref().unwrap().kind {
            node::NodeKind::Internal { split, left, right } => {
                assert_eq!(*split, root_split);
                assert_eq!(left.retained.len() + right.retained.len(), 48);
            }
            _ => panic!("expected a split"),
        }
        assert_eq!(t.n_retained(), 48);
        assert_eq!(t.evaluate_accuracy(&xor_batch(100, 12)).unwrap(), 1.0);
    }

    #[test]
    fn changed_split_rebuilds_to_fresh_tree() {
        let mut t = ForgetfulTree::new(TreeConfig::new(2));
        // concept A: label = x0
        let a: Vec<_> = (0..40)
            .map(|i| s(i, &[(i % 2) as f64, ((i / 2) % 2) as f64], (i % 2) as usize))
            .collect();
        t.build(&a, 3).unwrap();
        // concept B: label = x1, enough to outvote A
        let b: Vec<_> = (0..60)
            .map(|i| s(100 + i, &[(i % 2) as f64, ((i / 2) % 2) as f64], ((i / 2) % 2) as usize))
            .collect();
        t.update(&b, 3, 60).unwrap();
        let mut fresh = ForgetfulTree::new(TreeConfig::new(2));
        fresh.build(&t.retained(), 3).unwrap();
        for x in [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]] {
            assert_eq!(t.predict(&x).unwrap(), fresh.predict(&x).unwrap());
            assert_eq!(t.predict(&x).unwrap(), x[1] as usize);
        }
    }

    #[test]
    fn oldest_rows_are_forgotten_first() {
        let mut t = ForgetfulTree::new(TreeConfig::new(2));
        t.build(&xor_batch(0, 16), 4).unwrap();
        let forgotten = t.update(&xor_batch(16, 16), 4, 20).unwrap();
        assert_eq!(forgotten, 12);
        let ids: Vec<u64> = t.retained().iter().map(|s| s.id).collect();
        assert_eq!(ids, (12..32).collect::<Vec<_>>());
    }

    #[test]
    fn random_forgetting_respects_retention_bound() {
        let mut cfg = TreeConfig::new(2);
        cfg.forgetting = Forgetting::Random;
        cfg.seed = 9;
        let mut t = ForgetfulTree::new(cfg);
        t.build(&xor_batch(0, 30), 4).unwrap();
        t.update(&xor_batch(30, 10), 4, 25).unwrap();
        assert_eq!(t.n_retained(), 25);
        let ids: Vec<u64> = t.retained().iter().map(|s| s.id).collect();
        // the whole batch survives
        assert!((30..40).all(|id| ids.contains(&id)));
    }

    #[test]
    fn accuracy_of_complemented_labels() {
        let mut t = ForgetfulTree::new(TreeConfig::new(2));
        let train = xor_batch(0, 8);
        t.build(&train[..6], 1).unwrap();
        let acc = t.evaluate_accuracy(&train).unwrap();
        let flipped: Vec<_> = train.iter().map(|x| s(x.id, &x.features, 1 - x.label)).collect();
        assert!((t.evaluate_accuracy(&flipped).unwrap() - (1.0 - acc)).abs() < 1e-12);
        assert!(matches!(t.evaluate_accuracy(&[]), Err(Error::EmptyBatch)));
    }

    #[test]
    fn confusion_fixture_accuracy() {
        // single leaf predicting 1: TP=40, FP=15; second leaf predicting 0: TN=35, FN=10
        let mut t = ForgetfulTree::new(TreeConfig::new(2));
        let train = vec![s(0, &[0.0], 1), s(1, &[1.0], 0)];
        t.build(&train, 1).unwrap();
        let mut batch = Vec::new();
        batch.extend((0..40).map(|i| s(i, &[0.0], 1)));
        batch.extend((0..15).map(|i| s(i, &[0.0], 0)));
        batch.extend((0..35).map(|i| s(i, &[1.0], 0)));
        batch.extend((0..10).map(|i| s(i, &[1.0], 1)));
        assert!((t.evaluate_accuracy(&batch).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn cold_startup_never_discards() {
        let mut t = ForgetfulTree::new(TreeConfig::new(2));
        // labels are noise for a 3-feature tree: stays cold for a while
        let mut seen = 0;
        for k in 0..6u64 {
            let batch: Vec<_> = (0..20u64)
                .map(|i| {
                    let id = k * 20 + i;
                    s(
                        id,
                        &[(id % 7) as f64, (id % 3) as f64],
                        ((id * 2654435761) >> 7 & 1) as usize,
                    )
                })
                .collect();
            let cold = t.adapt_state().cold_startup;
            t.partial_fit(&batch).unwrap();
            seen += 20;
            if cold {
                assert_eq!(t.n_retained(), seen);
            }
        }
    }
}

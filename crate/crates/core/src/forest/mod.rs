//! The forgetful random forest.
//!
//! Every member is a [`ForgetfulTree`] restricted to its own random feature
//! subset, forgetting a random subset of its old rows, optionally fed a
//! Poisson-bagged copy of each batch. The forest tracks its own accuracy and,
//! when it drops significantly, replaces its worst members with trees rebuilt
//! from their retained rows.

mod bagging;
mod significance;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datastream::Sample;
use crate::error::{Error, Result};
use crate::splitter::Criterion;
use crate::tree::{
    max_height_for, AdaptState, ForgetfulTree, Forgetting, TreeConfig, DEFAULT_I_RATE, DEFAULT_WARM_SIZE,
};

pub use bagging::{
    bagging_sample, clamp_replication, draw_replication, draw_replication_raw, sample_feature_subset, BAGGING_LAMBDA,
    MAX_REPLICATION,
};
pub use significance::{significance_test, welch_bernoulli};

pub const DEFAULT_N_TREES: usize = 20;
pub const DEFAULT_T_THRESH: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_classes: usize,
    pub n_trees: usize,
    /// Significance level below which an accuracy drop discards trees.
    pub t_thresh: f64,
    pub bagging: bool,
    /// When false every tree may split on every feature.
    pub feature_subsets: bool,
    pub forgetting: Forgetting,
    pub criterion: Criterion,
    pub initial_i_rate: f64,
    pub initial_warm_size: usize,
    pub seed: u64,
}

impl ForestConfig {
    pub fn new(n_classes: usize) -> Self {
        ForestConfig {
            n_classes,
            n_trees: DEFAULT_N_TREES,
            t_thresh: DEFAULT_T_THRESH,
            bagging: false,
            feature_subsets: true,
            forgetting: Forgetting::Random,
            criterion: Criterion::Entropy,
            initial_i_rate: DEFAULT_I_RATE,
            initial_warm_size: DEFAULT_WARM_SIZE,
            seed: 0,
        }
    }
}

/// What one [`ForgetfulForest::update_forest`] call observed and did.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestStep {
    /// Net ensemble accuracy on the batch before training; `None` on the
    /// initial build.
    pub new_acc: Option<f64>,
    /// `lastAcc` before this step.
    pub last_acc: f64,
    /// `None` when there was nothing to compare against yet.
    pub p_value: Option<f64>,
    pub n_discard: usize,
    /// Indices of the replaced trees, worst first.
    pub discarded: Vec<usize>,
}

#[derive(Debug, Clone)]
struct Member {
    tree: ForgetfulTree,
    rng: ChaCha8Rng,
}

#[derive(Debug, Clone)]
pub struct ForgetfulForest {
    config: ForestConfig,
    members: Vec<Member>,
    rng: ChaCha8Rng,
    n_features: usize,
    last_acc: f64,
    last_size: usize,
}

/// `round(|new - last| / |last| * n_trees)` clamped to `[0, n_trees]`.
pub fn discard_count(new_acc: f64, last_acc: f64, n_trees: usize) -> usize {
    let raw = (new_acc - last_acc).abs() / last_acc.abs() * n_trees as f64;
    if raw.is_nan() {
        return 0;
    }
    raw.round().clamp(0.0, n_trees as f64) as usize
}

/// Class with the most votes; ties go to the lowest class index.
pub fn majority_vote(votes: &[usize]) -> usize {
    let mut best = 0;
    for (class, &v) in votes.iter().enumerate() {
        if v > votes[best] {
            best = class;
        }
    }
    best
}

/// Indices of the `n` lowest accuracies, worst first, ties to the lower
/// index.
pub fn worst_trees(accuracies: &[f64], n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..accuracies.len()).collect();
    order.sort_by(|&a, &b| accuracies[a].total_cmp(&accuracies[b]).then(a.cmp(&b)));
    order.truncate(n);
    order
}

impl ForgetfulForest {
    pub fn new(config: ForestConfig) -> Result<Self> {
        if config.n_trees == 0 {
            return Err(Error::Config("a forest needs at least one tree".into()));
        }
        if config.n_classes == 0 {
            return Err(Error::Config("n_classes must be positive".into()));
        }
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Ok(ForgetfulForest {
            config,
            members: Vec::new(),
            rng,
            n_features: 0,
            last_acc: 0.0,
            last_size: 0,
        })
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    pub fn is_built(&self) -> bool {
        !self.members.is_empty()
    }

    pub fn n_trees(&self) -> usize {
        self.members.len()
    }

    pub fn trees(&self) -> impl Iterator<Item = &ForgetfulTree> {
        self.members.iter().map(|m| &m.tree)
    }

    pub fn tree(&self, i: usize) -> &ForgetfulTree {
        &self.members[i].tree
    }

    pub fn last_acc(&self) -> f64 {
        self.last_acc
    }

    pub fn last_size(&self) -> usize {
        self.last_size
    }

    pub fn guess_acc(&self) -> f64 {
        1.0 / self.config.n_classes as f64
    }

    fn fresh_tree(&mut self) -> Member {
        let features = self
            .config
            .feature_subsets
            .then(|| sample_feature_subset(self.n_features, &mut self.rng));
        let config = TreeConfig {
            n_classes: self.config.n_classes,
            criterion: self.config.criterion,
            initial_i_rate: self.config.initial_i_rate,
            initial_warm_size: self.config.initial_warm_size,
            forgetting: self.config.forgetting,
            strategy: Default::default(),
            features,
            seed: self.rng.random(),
        };
        Member {
            tree: ForgetfulTree::new(config),
            rng: ChaCha8Rng::seed_from_u64(self.rng.random()),
        }
    }

    /// One forest step on `batch`: score it, possibly discard trees, then
    /// update every member.
    pub fn update_forest(&mut self, batch: &[Sample]) -> Result<ForestStep> {
        if batch.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let bagging = self.config.bagging;
        if !self.is_built() {
            self.n_features = batch[0].features.len();
            self.members = (0..self.config.n_trees).map(|_| self.fresh_tree()).collect();
            let max_height = max_height_for(batch.len() as f64);
            self.members.par_iter_mut().try_for_each(|m| -> Result<()> {
                let data = if bagging {
                    bagging_sample(batch, &mut m.rng)
                } else {
                    batch.to_vec()
                };
                m.tree.build(&data, max_height)?;
                m.tree.adapt_state_mut().r_size = data.len() as f64;
                Ok(())
            })?;
            return Ok(ForestStep {
                new_acc: None,
                last_acc: self.last_acc,
                p_value: None,
                n_discard: 0,
                discarded: Vec::new(),
            });
        }

        let n = batch.len();
        let guess = self.guess_acc();
        let new_acc = self.evaluate_accuracy(batch)? - guess;
        let last_acc = self.last_acc;
        let mut step = ForestStep {
            new_acc: Some(new_acc),
            last_acc,
            p_value: None,
            n_discard: 0,
            discarded: Vec::new(),
        };
        if self.last_size == 0 {
            self.last_acc = new_acc;
            self.last_size = n;
        } else {
            let p = significance_test(new_acc, last_acc, n, self.last_size, guess);
            step.p_value = Some(p);
            if p < self.config.t_thresh {
                if new_acc < last_acc {
                    step.n_discard = discard_count(new_acc, last_acc, self.members.len());
                    step.discarded = self.discard_trees(step.n_discard, batch)?;
                }
                self.last_acc = new_acc;
                self.last_size = n;
            } else {
                let total = self.last_size + n;
                self.last_acc = (last_acc * self.last_size as f64 + new_acc * n as f64) / total as f64;
                self.last_size = total;
            }
        }

        self.members.par_iter_mut().try_for_each(|m| -> Result<()> {
            if bagging {
                let bagged = bagging_sample(batch, &mut m.rng);
                m.tree.partial_fit(&bagged)?;
            } else {
                m.tree.partial_fit(batch)?;
            }
            Ok(())
        })?;
        Ok(step)
    }

    /// Replaces the `n_discard` members least accurate on `batch` (ties to the
    /// lower index) with trees rebuilt from the same retained rows, new
    /// feature subsets and re-initialised controllers. Returns the replaced
    /// indices, worst first.
    pub fn discard_trees(&mut self, n_discard: usize, batch: &[Sample]) -> Result<Vec<usize>> {
        if n_discard > self.members.len() {
            return Err(Error::DiscardCount {
                n_discard,
                n_trees: self.members.len(),
            });
        }
        if n_discard == 0 {
            return Ok(Vec::new());
        }
        let accuracies: Vec<f64> = self
            .members
            .par_iter()
            .map(|m| m.tree.evaluate_accuracy(batch))
            .collect::<Result<_>>()?;
        let order = worst_trees(&accuracies, n_discard);

        let guess = self.guess_acc();
        for &i in &order {
            let retained = self.members[i].tree.retained();
            let mut member = self.fresh_tree();
            member.tree.build(&retained, max_height_for(retained.len() as f64))?;
            let mut state = AdaptState::new(
                self.config.initial_i_rate,
                self.config.initial_warm_size,
                retained.len() as f64,
            );
            state.last_acc = member.tree.evaluate_accuracy(batch)? - guess;
            state.last_size = batch.len();
            *member.tree.adapt_state_mut() = state;
            self.members[i] = member;
        }
        Ok(order)
    }

    /// Per-class vote counts for `x`.
    pub fn votes(&self, x: &[f64]) -> Result<Vec<usize>> {
        if !self.is_built() {
            return Err(Error::NotBuilt);
        }
        let mut votes = vec![0; self.config.n_classes];
        for m in &self.members {
            votes[m.tree.predict(x)?] += 1;
        }
        Ok(votes)
    }

    /// Majority vote; ties go to the lowest class index.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(majority_vote(&self.votes(x)?))
    }

    pub fn correctness(&self, batch: &[Sample]) -> Result<Vec<bool>> {
        batch
            .par_iter()
            .map(|s| Ok(self.predict(&s.features)? == s.label))
            .collect()
    }

    pub fn evaluate_accuracy(&self, batch: &[Sample]) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let correct = self.correctness(batch)?;
        Ok(correct.iter().filter(|&&c| c).count() as f64 / batch.len() as f64)
    }

    pub fn mean_r_size(&self) -> f64 {
        self.trees().map(|t| t.adapt_state().r_size).sum::<f64>() / self.members.len().max(1) as f64
    }

    pub fn mean_i_rate(&self) -> f64 {
        self.trees().map(|t| t.adapt_state().i_rate).sum::<f64>() / self.members.len().max(1) as f64
    }
}

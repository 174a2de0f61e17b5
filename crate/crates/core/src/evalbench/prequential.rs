use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::flatten::find_flatten_out;
use super::metrics::{metrics_from_confusion, BinaryCounts};
use crate::datastream::Sample;
use crate::error::{Error, Result};
use crate::forest::{ForestConfig, ForgetfulForest, DEFAULT_N_TREES, DEFAULT_T_THRESH};
use crate::splitter::Criterion;
use crate::tree::{ForgetfulTree, TreeConfig, DEFAULT_I_RATE, DEFAULT_WARM_SIZE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[default]
    Tree,
    Forest,
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tree" => Ok(ModelKind::Tree),
            "forest" => Ok(ModelKind::Forest),
            other => Err(Error::Config(format!("unknown model `{other}`"))),
        }
    }
}

/// Hyperparameters for either model. Forest-only fields are ignored for a
/// tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub criterion: Criterion,
    pub i_rate: f64,
    pub warm_size: usize,
    pub n_trees: usize,
    pub t_thresh: f64,
    pub bagging: bool,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            kind: ModelKind::Tree,
            criterion: Criterion::Entropy,
            i_rate: DEFAULT_I_RATE,
            warm_size: DEFAULT_WARM_SIZE,
            n_trees: DEFAULT_N_TREES,
            t_thresh: DEFAULT_T_THRESH,
            bagging: false,
            seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn tree_config(&self, n_classes: usize) -> TreeConfig {
        TreeConfig {
            criterion: self.criterion,
            initial_i_rate: self.i_rate,
            initial_warm_size: self.warm_size,
            seed: self.seed,
            ..TreeConfig::new(n_classes)
        }
    }

    pub fn forest_config(&self, n_classes: usize) -> ForestConfig {
        ForestConfig {
            n_trees: self.n_trees,
            t_thresh: self.t_thresh,
            bagging: self.bagging,
            criterion: self.criterion,
            initial_i_rate: self.i_rate,
            initial_warm_size: self.warm_size,
            seed: self.seed,
            ..ForestConfig::new(n_classes)
        }
    }

    pub fn build(&self, n_classes: usize) -> Result<Model> {
        Ok(match self.kind {
            ModelKind::Tree => Model::Tree(ForgetfulTree::new(self.tree_config(n_classes))),
            ModelKind::Forest => Model::Forest(ForgetfulForest::new(self.forest_config(n_classes))?),
        })
    }
}

#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum Model {
    Tree(ForgetfulTree),
    Forest(ForgetfulForest),
}

impl Model {
    pub fn is_built(&self) -> bool {
        match self {
            Model::Tree(t) => t.is_built(),
            Model::Forest(f) => f.is_built(),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        match self {
            Model::Tree(t) => t.predict(x),
            Model::Forest(f) => f.predict(x),
        }
    }

    pub fn fit(&mut self, batch: &[Sample]) -> Result<()> {
        match self {
            Model::Tree(t) => t.partial_fit(batch).map(drop),
            Model::Forest(f) => f.update_forest(batch).map(drop),
        }
    }

    /// Retain size; the mean over members for a forest.
    pub fn r_size(&self) -> f64 {
        match self {
            Model::Tree(t) => t.adapt_state().r_size,
            Model::Forest(f) => f.mean_r_size(),
        }
    }

    pub fn i_rate(&self) -> f64 {
        match self {
            Model::Tree(t) => t.adapt_state().i_rate,
            Model::Forest(f) => f.mean_i_rate(),
        }
    }
}

/// Where aggregate metrics start counting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureStart {
    /// At the flatten-out point of the per-sample correctness history.
    #[default]
    Auto,
    /// At this stream position (in samples).
    Fixed(usize),
}

/// Metrics for one scored batch. `tp`/`tn`/`fp`/`fn` are one-vs-rest for
/// the class of interest; `accuracy` is `correct / n` over all classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub batch: usize,
    /// Stream position of the batch's first sample.
    pub start: usize,
    pub n: usize,
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub correct: usize,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub update_secs: f64,
    pub r_size: f64,
    pub i_rate: f64,
}

impl EvalRecord {
    pub fn counts(&self) -> BinaryCounts {
        BinaryCounts {
            tp: self.tp,
            tn: self.tn,
            fp: self.fp,
            fn_: self.fn_,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    /// Stream position from which records were aggregated.
    pub measure_start: usize,
    /// Whether `measure_start` came from a detected flatten-out point.
    pub flattened: bool,
    pub n_batches: usize,
    pub n_samples: usize,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Update time over every batch, including the initial build.
    pub total_update_secs: f64,
}

/// Aggregates records starting at or after `from`; every record when none
/// does.
pub fn aggregate(records: &[EvalRecord], from: usize, flattened: bool, build_secs: f64) -> Aggregate {
    let total_update_secs = build_secs + records.iter().map(|r| r.update_secs).sum::<f64>();
    let mut measured: Vec<&EvalRecord> = records.iter().filter(|r| r.start >= from).collect();
    let mut measure_start = from;
    if measured.is_empty() && !records.is_empty() {
        log::warn!("no batch starts at or after position {from}; aggregating all batches");
        measured = records.iter().collect();
        measure_start = records[0].start;
    }
    let n_samples: usize = measured.iter().map(|r| r.n).sum();
    let correct: usize = measured.iter().map(|r| r.correct).sum();
    let mut counts = BinaryCounts::default();
    for r in &measured {
        counts += r.counts();
    }
    let (precision, recall, f1) = metrics_from_confusion(&counts)
        .map(|m| (m.precision, m.recall, m.f1))
        .unwrap_or((0.0, 0.0, 0.0));
    Aggregate {
        measure_start,
        flattened,
        n_batches: measured.len(),
        n_samples,
        accuracy: if n_samples == 0 {
            0.0
        } else {
            correct as f64 / n_samples as f64
        },
        precision,
        recall,
        f1,
        total_update_secs,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub records: Vec<EvalRecord>,
    pub aggregate: Aggregate,
}

/// Test-then-train over `batches`: the first batch only builds the model;
/// every later batch is predicted, scored, then learned.
pub fn run_prequential<I>(model: &mut Model, batches: I, measure: MeasureStart, positive: usize) -> Result<RunReport>
where
    I: IntoIterator<Item = Vec<Sample>>,
{
    let mut records = Vec::new();
    let mut history = Vec::new();
    let mut position = 0;
    let mut first_len = None;
    let mut build_secs = 0.0;
    for (index, batch) in batches.into_iter().enumerate() {
        if batch.is_empty() {
            continue;
        }
        if !model.is_built() {
            let t0 = Instant::now();
            model.fit(&batch)?;
            build_secs = t0.elapsed().as_secs_f64();
            first_len = Some(batch.len());
            position += batch.len();
            continue;
        }
        let predicted: Vec<usize> = batch
            .iter()
            .map(|s| model.predict(&s.features))
            .collect::<Result<_>>()?;
        let counts = BinaryCounts::tally(predicted.iter().copied().zip(batch.iter().map(|s| s.label)), positive);
        let metrics = metrics_from_confusion(&counts)?;
        let hits: Vec<bool> = predicted.iter().zip(&batch).map(|(&p, s)| p == s.label).collect();
        let correct = hits.iter().filter(|&&c| c).count();
        history.extend_from_slice(&hits);

        let t0 = Instant::now();
        model.fit(&batch)?;
        let update_secs = t0.elapsed().as_secs_f64();
        records.push(EvalRecord {
            batch: index,
            start: position,
            n: batch.len(),
            tp: counts.tp,
            tn: counts.tn,
            fp: counts.fp,
            fn_: counts.fn_,
            correct,
            accuracy: correct as f64 / batch.len() as f64,
            precision: metrics.precision,
            recall: metrics.recall,
            f1: metrics.f1,
            update_secs,
            r_size: model.r_size(),
            i_rate: model.i_rate(),
        });
        position += batch.len();
    }
    let offset = first_len.unwrap_or(0);
    let (from, flattened) = match measure {
        MeasureStart::Fixed(k) => (k, false),
        MeasureStart::Auto => match find_flatten_out(&history) {
            Ok(Some(t)) => (offset + t, true),
            Ok(None) => {
                log::warn!("accuracy never flattened out; measuring after the first batch");
                (offset, false)
            }
            Err(_) => {
                if !records.is_empty() {
                    log::warn!(
                        "only {} scored samples; too few to locate a flatten-out point",
                        history.len()
                    );
                }
                (offset, false)
            }
        },
    };
    let aggregate = aggregate(&records, from, flattened, build_secs);
    Ok(RunReport { records, aggregate })
}

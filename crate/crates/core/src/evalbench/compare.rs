use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::datastream::Sample;
use crate::error::Result;
use crate::tree::{ForgetfulTree, TreeConfig, UpdateStrategy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub n_batches: usize,
    pub incremental_secs: f64,
    pub rebuild_secs: f64,
    pub incremental_accuracy: f64,
    pub rebuild_accuracy: f64,
    /// Every prediction of the two trees agreed on every scored batch.
    pub identical: bool,
    pub first_mismatch: Option<usize>,
}

impl CompareReport {
    /// `incremental_secs / rebuild_secs`.
    pub fn time_ratio(&self) -> f64 {
        self.incremental_secs / self.rebuild_secs
    }
}

/// Runs an incrementally updated tree and a rebuilt-every-batch tree side
/// by side over the same batches and times their updates.
pub fn compare_rebuild<I>(batches: I, config: &TreeConfig) -> Result<CompareReport>
where
    I: IntoIterator<Item = Vec<Sample>>,
{
    let mut incremental = ForgetfulTree::new(TreeConfig {
        strategy: UpdateStrategy::Incremental,
        ..config.clone()
    });
    let mut rebuild = ForgetfulTree::new(TreeConfig {
        strategy: UpdateStrategy::Rebuild,
        ..config.clone()
    });
    let mut report = CompareReport {
        n_batches: 0,
        incremental_secs: 0.0,
        rebuild_secs: 0.0,
        incremental_accuracy: 0.0,
        rebuild_accuracy: 0.0,
        identical: true,
        first_mismatch: None,
    };
    let (mut scored, mut inc_hits, mut reb_hits) = (0usize, 0usize, 0usize);
    for (index, batch) in batches.into_iter().enumerate() {
        if batch.is_empty() {
            continue;
        }
        report.n_batches += 1;
        if incremental.is_built() {
            for s in &batch {
                let a = incremental.predict(&s.features)?;
                let b = rebuild.predict(&s.features)?;
                inc_hits += usize::from(a == s.label);
                reb_hits += usize::from(b == s.label);
                if a != b && report.identical {
                    report.identical = false;
                    report.first_mismatch = Some(index);
                }
            }
            scored += batch.len();
        }
        let t0 = Instant::now();
        incremental.partial_fit(&batch)?;
        report.incremental_secs += t0.elapsed().as_secs_f64();
        let t0 = Instant::now();
        rebuild.partial_fit(&batch)?;
        report.rebuild_secs += t0.elapsed().as_secs_f64();
    }
    if scored > 0 {
        report.incremental_accuracy = inc_hits as f64 / scored as f64;
        report.rebuild_accuracy = reb_hits as f64 / scored as f64;
    }
    Ok(report)
}

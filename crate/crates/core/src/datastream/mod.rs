//! Sample streams: CSV ingestion, batching and a synthetic drift generator.

mod generator;
mod ingest;

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use generator::{DriftConfig, DriftStream, Intensity};
pub use ingest::{load_csv, ColumnKind, ColumnSpec, Dataset, Encoder, Schema};

/// One labelled observation. `id` is the arrival position in its stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub id: u64,
    pub features: Vec<f64>,
    pub label: usize,
}

/// Consecutive, non-overlapping chunks of `batch_size` samples; the last
/// chunk may be shorter.
pub fn batched<I>(stream: I, batch_size: usize) -> Batched<I::IntoIter>
where
    I: IntoIterator<Item = Sample>,
{
    assert!(batch_size >= 1, "batch size must be at least 1");
    Batched {
        inner: stream.into_iter(),
        batch_size,
    }
}

#[derive(Debug, Clone)]
pub struct Batched<I> {
    inner: I,
    batch_size: usize,
}

impl<I: Iterator<Item = Sample>> Iterator for Batched<I> {
    type Item = Vec<Sample>;

    fn next(&mut self) -> Option<Vec<Sample>> {
        let batch: Vec<Sample> = self.inner.by_ref().take(self.batch_size).collect();
        (!batch.is_empty()).then_some(batch)
    }
}

/// Writes samples as CSV with a header `f0,..,f{n-1},label` (or the given
/// feature names).
pub fn write_csv<W: Write>(out: W, samples: &[Sample], feature_names: Option<&[String]>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let width = samples.first().map_or(0, |s| s.features.len());
    let mut header: Vec<String> = match feature_names {
        Some(names) => names.to_vec(),
        None => (0..width).map(|i| format!("f{i}")).collect(),
    };
    header.push("label".to_string());
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(width + 1);
    for s in samples {
        row.clear();
        row.extend(s.features.iter().map(f64::to_string));
        row.push(s.label.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(path: &Path, samples: &[Sample], feature_names: Option<&[String]>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv(std::io::BufWriter::new(file), samples, feature_names)
}

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::prequential::{run_prequential, MeasureStart, ModelConfig, ModelKind};
use crate::datastream::{batched, DriftConfig, Intensity};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TuneParam {
    IRate,
    TThresh,
    NTrees,
}

impl std::str::FromStr for TuneParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "i_rate" | "irate" => Ok(TuneParam::IRate),
            "t_thresh" | "tthresh" => Ok(TuneParam::TThresh),
            "n_trees" | "ntrees" | "ntree" => Ok(TuneParam::NTrees),
            other => Err(Error::Config(format!("unknown tuning parameter `{other}`"))),
        }
    }
}

impl TuneParam {
    pub fn name(self) -> &'static str {
        match self {
            TuneParam::IRate => "i_rate",
            TuneParam::TThresh => "t_thresh",
            TuneParam::NTrees => "n_trees",
        }
    }

    pub fn default_values(self) -> Vec<f64> {
        match self {
            TuneParam::IRate => (1..=9).map(|k| k as f64 / 10.0).collect(),
            TuneParam::TThresh => vec![0.001, 0.01, 0.05, 0.1, 0.2, 0.3, 0.5],
            TuneParam::NTrees => vec![1.0, 5.0, 10.0, 20.0, 30.0, 40.0],
        }
    }

    /// `base` with this parameter set to `value`. Forest parameters switch
    /// the model to a forest.
    pub fn apply(self, base: &ModelConfig, value: f64) -> ModelConfig {
        let mut c = base.clone();
        match self {
            TuneParam::IRate => c.i_rate = value,
            TuneParam::TThresh => {
                c.kind = ModelKind::Forest;
                c.t_thresh = value;
            }
            TuneParam::NTrees => {
                c.kind = ModelKind::Forest;
                c.n_trees = value.round().max(1.0) as usize;
            }
        }
        c
    }
}

/// Three drifting streams of increasing severity.
pub fn default_tune_datasets(n_samples: usize) -> Vec<DriftConfig> {
    [
        (Intensity::Mild, 1, 0.0),
        (Intensity::Medium, 2, 0.5),
        (Intensity::Drastic, 3, 1.0),
    ]
    .into_iter()
    .enumerate()
    .map(|(i, (intensity, n_drifts, noise_std))| DriftConfig {
        n_samples,
        n_drifts,
        intensity,
        noise_std,
        seed: 100 + i as u64,
        ..DriftConfig::default()
    })
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneRow {
    pub value: f64,
    /// Aggregate accuracy on each dataset.
    pub accuracies: Vec<f64>,
    pub mean_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneTable {
    pub param: TuneParam,
    pub rows: Vec<TuneRow>,
}

impl TuneTable {
    pub fn best(&self) -> Option<&TuneRow> {
        self.rows
            .iter()
            .max_by(|a, b| a.mean_accuracy.total_cmp(&b.mean_accuracy))
    }

    pub fn row(&self, value: f64) -> Option<&TuneRow> {
        self.rows.iter().find(|r| (r.value - value).abs() < 1e-12)
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W, n_datasets: usize) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![self.param.name().to_string()];
        header.extend((0..n_datasets).map(|i| format!("dataset{i}")));
        header.push("mean".to_string());
        w.write_record(&header)?;
        for r in &self.rows {
            let mut row = vec![r.value.to_string()];
            row.extend(r.accuracies.iter().map(f64::to_string));
            row.push(r.mean_accuracy.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Prequential accuracy for each value of `param` on each dataset.
pub fn tune(
    param: TuneParam,
    values: &[f64],
    datasets: &[DriftConfig],
    base: &ModelConfig,
    batch_size: usize,
) -> Result<TuneTable> {
    if values.is_empty() || datasets.is_empty() {
        return Err(Error::Config("tuning needs at least one value and one dataset".into()));
    }
    let streams: Vec<Vec<_>> = datasets.iter().map(DriftConfig::generate).collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = (0..values.len())
        .flat_map(|v| (0..streams.len()).map(move |d| (v, d)))
        .collect();
    let results: Vec<f64> = jobs
        .par_iter()
        .map(|&(v, d)| {
            let config = param.apply(base, values[v]);
            let mut model = config.build(2)?;
            let report = run_prequential(
                &mut model,
                batched(streams[d].iter().cloned(), batch_size),
                MeasureStart::Auto,
                1,
            )?;
            Ok(report.aggregate.accuracy)
        })
        .collect::<Result<_>>()?;
    let rows = values
        .iter()
        .enumerate()
        .map(|(v, &value)| {
            let accuracies = results[v * streams.len()..(v + 1) * streams.len()].to_vec();
            let mean_accuracy = accuracies.iter().sum::<f64>() / accuracies.len() as f64;
            TuneRow {
                value,
                accuracies,
                mean_accuracy,
            }
        })
        .collect();
    Ok(TuneTable { param, rows })
}

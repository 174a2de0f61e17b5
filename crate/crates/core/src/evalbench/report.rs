use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::prequential::{Aggregate, EvalRecord, RunReport};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::Config(format!("unknown report format `{other}`"))),
        }
    }
}

impl ReportFormat {
    /// Guesses from a file extension, defaulting to CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => ReportFormat::Json,
            _ => ReportFormat::Csv,
        }
    }
}

impl Aggregate {
    pub fn to_pairs(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("measure_start", self.measure_start as f64),
            ("flattened", f64::from(u8::from(self.flattened))),
            ("n_batches", self.n_batches as f64),
            ("n_samples", self.n_samples as f64),
            ("accuracy", self.accuracy),
            ("precision", self.precision),
            ("recall", self.recall),
            ("f1", self.f1),
            ("total_update_secs", self.total_update_secs),
        ]
    }

    pub fn from_pairs(pairs: &[(String, f64)]) -> Result<Self> {
        let get = |name: &str| {
            pairs
                .iter()
                .find(|(k, _)| k == name)
                .map(|&(_, v)| v)
                .ok_or_else(|| Error::Config(format!("aggregate block lacks `{name}`")))
        };
        Ok(Aggregate {
            measure_start: get("measure_start")? as usize,
            flattened: get("flattened")? != 0.0,
            n_batches: get("n_batches")? as usize,
            n_samples: get("n_samples")? as usize,
            accuracy: get("accuracy")?,
            precision: get("precision")?,
            recall: get("recall")?,
            f1: get("f1")?,
            total_update_secs: get("total_update_secs")?,
        })
    }
}

/// Per-batch rows, a blank line, then a `metric,value` aggregate block.
pub fn write_report_csv<W: Write>(mut out: W, report: &RunReport) -> Result<()> {
    {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut out);
        w.write_record([
            "batch",
            "start",
            "n",
            "tp",
            "tn",
            "fp",
            "fn",
            "correct",
            "accuracy",
            "precision",
            "recall",
            "f1",
            "update_secs",
            "r_size",
            "i_rate",
        ])?;
        for r in &report.records {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    writeln!(out)?;
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record(["metric", "value"])?;
    for (k, v) in report.aggregate.to_pairs() {
        w.write_record([k.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_report_csv<R: Read>(mut input: R) -> Result<RunReport> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let text = text.replace("\r\n", "\n");
    let (rows, tail) = text
        .split_once("\n\n")
        .ok_or_else(|| Error::Config("report lacks an aggregate block".into()))?;
    let mut records = Vec::new();
    for r in csv::Reader::from_reader(rows.as_bytes()).deserialize() {
        let r: EvalRecord = r?;
        records.push(r);
    }
    let mut pairs = Vec::new();
    for row in csv::Reader::from_reader(tail.as_bytes()).deserialize() {
        let (k, v): (String, f64) = row?;
        pairs.push((k, v));
    }
    Ok(RunReport {
        records,
        aggregate: Aggregate::from_pairs(&pairs)?,
    })
}

pub fn emit_report(report: &RunReport, path: &Path, format: ReportFormat) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    match format {
        ReportFormat::Csv => write_report_csv(file, report),
        ReportFormat::Json => Ok(serde_json::to_writer_pretty(file, report)?),
    }
}

/// Mean and 95% Student-t half-width. The half-width is NaN for fewer than
/// two values.
pub fn confidence_interval(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    // shifted by the first value so identical inputs give an exact mean
    let shift = values[0];
    let mean = shift + values.iter().map(|v| v - shift).sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975);
    (mean, t * (var / n as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub metric: String,
    pub mean: f64,
    pub half_width: f64,
    pub low: f64,
    pub high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seeds: Vec<u64>,
    pub runs: Vec<Aggregate>,
    pub metrics: Vec<MetricSummary>,
}

pub fn summarize_seeds(seeds: &[u64], runs: &[Aggregate]) -> SeedSummary {
    let names = ["accuracy", "precision", "recall", "f1", "total_update_secs"];
    let metrics = names
        .iter()
        .map(|&name| {
            let values: Vec<f64> = runs
                .iter()
                .map(|a| {
                    a.to_pairs()
                        .into_iter()
                        .find(|(k, _)| *k == name)
                        .map(|(_, v)| v)
                        .expect("known metric")
                })
                .collect();
            let (mean, half_width) = confidence_interval(&values);
            let hw = if half_width.is_nan() { 0.0 } else { half_width };
            MetricSummary {
                metric: name.to_string(),
                mean,
                half_width,
                low: mean - hw,
                high: mean + hw,
            }
        })
        .collect();
    SeedSummary {
        seeds: seeds.to_vec(),
        runs: runs.to_vec(),
        metrics,
    }
}

/// Per-seed aggregate rows, a blank line, then the interval table.
pub fn write_summary_csv<W: Write>(mut out: W, summary: &SeedSummary) -> Result<()> {
    {
        let mut w = csv::Writer::from_writer(&mut out);
        let mut header = vec!["seed".to_string()];
        if let Some(first) = summary.runs.first() {
            header.extend(first.to_pairs().into_iter().map(|(k, _)| k.to_string()));
        }
        w.write_record(&header)?;
        for (seed, run) in summary.seeds.iter().zip(&summary.runs) {
            let mut row = vec![seed.to_string()];
            row.extend(run.to_pairs().into_iter().map(|(_, v)| v.to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
    }
    writeln!(out)?;
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record(["metric", "mean", "ci95_low", "ci95_high", "half_width"])?;
    for m in &summary.metrics {
        w.write_record([
            m.metric.clone(),
            m.mean.to_string(),
            m.low.to_string(),
            m.high.to_string(),
            m.half_width.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_summary(summary: &SeedSummary, path: &Path, format: ReportFormat) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    match format {
        ReportFormat::Csv => write_summary_csv(file, summary),
        ReportFormat::Json => Ok(serde_json::to_writer_pretty(file, summary)?),
    }
}

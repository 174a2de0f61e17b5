//! Prequential evaluation, metrics, reporting and parameter sweeps.

mod compare;
mod config;
mod flatten;
mod metrics;
mod prequential;
mod report;
mod tune;

pub use compare::{compare_rebuild, CompareReport};
pub use config::{RunConfig, DEFAULT_BATCH_SIZE};
pub use flatten::{find_flatten_out, flatten_out_point, FLATTEN_TOLERANCE, FLATTEN_WINDOW};
pub use metrics::{metrics_from_confusion, BinaryCounts, Metrics};
pub use prequential::{
    aggregate, run_prequential, Aggregate, EvalRecord, MeasureStart, Model, ModelConfig, ModelKind, RunReport,
};
pub use report::{
    confidence_interval, emit_report, emit_summary, read_report_csv, summarize_seeds, write_report_csv,
    write_summary_csv, MetricSummary, ReportFormat, SeedSummary,
};
pub use tune::{default_tune_datasets, tune, TuneParam, TuneRow, TuneTable};

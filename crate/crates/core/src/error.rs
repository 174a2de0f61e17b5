use std::path::PathBuf;

use thiserror::Error;

use crate::splitter::RowId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("impurity of an empty label set is undefined")]
    EmptyLabels,

    #[error("split search needs at least 2 samples, got {0}")]
    TooFewSamples(usize),

    #[error("every considered feature is constant; node cannot be split")]
    Unsplittable,

    #[error("identifier {0} is not present in the sorted columns")]
    UnknownIdentifier(RowId),

    #[error("empty batch")]
    EmptyBatch,

    #[error("retain size {r_size} is smaller than the incoming batch ({batch})")]
    RetainSizeTooSmall { r_size: usize, batch: usize },

    #[error("model has not been built yet")]
    NotBuilt,

    #[error("sample has {got} features, expected {expected}")]
    FeatureCount { expected: usize, got: usize },

    #[error("label {label} out of range for {n_classes} classes")]
    LabelOutOfRange { label: usize, n_classes: usize },

    #[error("discard count {n_discard} exceeds forest size {n_trees}")]
    DiscardCount { n_discard: usize, n_trees: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("history of {0} samples is too short (need at least 1000)")]
    HistoryTooShort(usize),

    #[error("confusion counts are all zero")]
    EmptyConfusion,

    #[error("{path}: row {row}: {message}")]
    Parse { path: PathBuf, row: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

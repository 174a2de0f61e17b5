//! Streaming decision trees and random forests that forget old data.
//!
//! [`tree::ForgetfulTree`] keeps a bounded window of recent samples whose
//! size adapts to the observed accuracy, and updates its splits by merging
//! sorted columns instead of re-sorting. [`forest::ForgetfulForest`] is an
//! ensemble of such trees with random feature subsets and significance-gated
//! replacement of weak members. [`evalbench`] drives both prequentially.

pub mod datastream;
pub mod error;
pub mod evalbench;
pub mod forest;
pub mod splitter;
pub mod tree;

pub use datastream::Sample;
pub use error::{Error, Result};

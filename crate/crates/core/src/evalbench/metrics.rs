use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One-vs-rest confusion counts for a class of interest.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl BinaryCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    /// Tallies predictions against labels, treating `positive` as the
    /// class of interest.
    pub fn tally(pairs: impl IntoIterator<Item = (usize, usize)>, positive: usize) -> Self {
        let mut c = BinaryCounts::default();
        for (predicted, actual) in pairs {
            match (predicted == positive, actual == positive) {
                (true, true) => c.tp += 1,
                (false, false) => c.tn += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        c
    }
}

impl std::ops::AddAssign for BinaryCounts {
    fn add_assign(&mut self, o: Self) {
        self.tp += o.tp;
        self.tn += o.tn;
        self.fp += o.fp;
        self.fn_ += o.fn_;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when the corresponding denominator was zero and the value was
    /// reported as 0.
    pub precision_undefined: bool,
    pub recall_undefined: bool,
    pub f1_undefined: bool,
    /// No true positives: precision, recall and f1 are all 0 or undefined.
    pub degenerate: bool,
}

fn ratio(num: u64, den: u64) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

pub fn metrics_from_confusion(c: &BinaryCounts) -> Result<Metrics> {
    let total = c.total();
    if total == 0 {
        return Err(Error::EmptyConfusion);
    }
    let (precision, precision_undefined) = ratio(c.tp, c.tp + c.fp);
    let (recall, recall_undefined) = ratio(c.tp, c.tp + c.fn_);
    let (f1, f1_undefined) = ratio(2 * c.tp, 2 * c.tp + c.fn_ + c.fp);
    Ok(Metrics {
        accuracy: (c.tp + c.tn) as f64 / total as f64,
        precision,
        recall,
        f1,
        precision_undefined,
        recall_undefined,
        f1_undefined,
        degenerate: c.tp == 0,
    })
}

//! Retain-size, increase-rate and height controller.
//!
//! Accuracies are tracked net of uniform guessing (`1/nClasses`), so a value
//! `<= 0` means the model is doing no better than chance on the latest batch.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_I_RATE: f64 = 0.3;
pub const DEFAULT_WARM_SIZE: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptState {
    /// Number of most recent samples to retain. Fractional; floored only when
    /// counting rows to discard.
    pub r_size: f64,
    pub i_rate: f64,
    pub warm_size: usize,
    pub cold_startup: bool,
    pub last_acc: f64,
    pub last_size: usize,
    /// Per-sample correctness seen while in cold startup.
    #[serde(skip)]
    history: Vec<bool>,
}

/// What one adaptation step decided.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adaptation {
    pub max_height: usize,
    pub new_acc: f64,
    pub guess_acc: f64,
}

/// Multiplicative adjustment of the retain size for a change in accuracy.
pub fn r_change(new_acc: f64, last_acc: f64) -> f64 {
    let ratio = new_acc / last_acc;
    ratio.powf(2f64.max(3.0 - ratio))
}

/// Height limit that gives roughly one sample per leaf in a balanced tree.
pub fn max_height_for(r_size: f64) -> usize {
    if r_size < 1.0 {
        return 0;
    }
    r_size.log2().floor() as usize
}

impl AdaptState {
    pub fn new(i_rate: f64, warm_size: usize, r_size: f64) -> Self {
        AdaptState {
            r_size,
            i_rate,
            warm_size,
            cold_startup: true,
            last_acc: 0.0,
            last_size: 0,
            history: Vec::new(),
        }
    }

    /// Retain size as a row count.
    pub fn retain_count(&self) -> usize {
        self.r_size.floor() as usize
    }

    /// One controller step given which samples of the incoming batch the
    /// current (pre-update) model got right.
    pub fn adapt(&mut self, correct: &[bool], n_classes: usize) -> Result<Adaptation> {
        if correct.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let n = correct.len();
        let guess_acc = 1.0 / n_classes as f64;
        let hits = correct.iter().filter(|&&c| c).count();
        let new_acc = hits as f64 / n as f64 - guess_acc;
        self.step(new_acc, n, guess_acc, correct);
        Ok(Adaptation {
            max_height: max_height_for(self.r_size),
            new_acc,
            guess_acc,
        })
    }

    /// Warm-mode and cold-mode update from an already computed net accuracy.
    /// `correct` feeds the cold-startup history and may be empty in warm mode.
    pub fn step(&mut self, new_acc: f64, n: usize, guess_acc: f64, correct: &[bool]) {
        let n_f = n as f64;
        if self.cold_startup {
            self.history.extend_from_slice(correct);
            while self.r_size + n_f >= self.warm_size as f64 {
                self.warm_size *= 2;
                if self.cold_startup && self.recent_half_accuracy(n) > guess_acc {
                    self.cold_startup = false;
                    self.last_acc = new_acc;
                    self.last_size = n;
                }
            }
            self.r_size += n_f;
            if !self.cold_startup {
                self.history = Vec::new();
            }
        } else if new_acc <= 0.0 {
            self.r_size = n_f;
        } else if self.last_acc <= 0.0 {
            self.r_size += n_f;
        } else {
            let last_acc = self.last_acc;
            self.i_rate = self.i_rate * last_acc / new_acc;
            let change = r_change(new_acc, last_acc);
            self.r_size = (self.r_size * change + self.i_rate * n_f).min(self.r_size + n_f);
            self.last_acc = new_acc;
            self.last_size = n;
        }
        if self.r_size < n_f {
            self.r_size = n_f;
        }
    }

    /// Mean correctness over the most recent half of all samples seen so far
    /// (including the first, unscored batch in the count).
    fn recent_half_accuracy(&self, batch: usize) -> f64 {
        let seen = self.r_size.floor() as usize + batch;
        let window = seen.div_ceil(2).min(self.history.len());
        if window == 0 {
            return 0.0;
        }
        let tail = &self.history[self.history.len() - window..];
        tail.iter().filter(|&&c| c).count() as f64 / window as f64
    }
}

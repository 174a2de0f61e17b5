//! Impurity scoring and binary split search.
//!
//! A node keeps, for every feature it may split on, its samples ordered by
//! that feature's value ([`SortedColumns`]). A fresh search ([`min_g`]) sorts
//! everything; the incremental search ([`min_g_inc`]) only sorts the incoming
//! samples and merges them into the already sorted retained ones. Both paths
//! produce identical column orders because ties are broken by row id.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifier of one stored row. Larger ids arrived later.
pub type RowId = u64;

/// Impurity function used to score candidate splits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    #[default]
    Entropy,
    Gini,
}

impl std::str::FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "entropy" => Ok(Criterion::Entropy),
            "gini" => Ok(Criterion::Gini),
            other => Err(Error::Config(format!("unknown criterion `{other}`"))),
        }
    }
}

/// Impurity of a multiset of class labels.
pub fn impurity(labels: &[usize], criterion: Criterion) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::EmptyLabels);
    }
    let n_classes = labels.iter().copied().max().unwrap_or(0) + 1;
    let mut counts = vec![0usize; n_classes];
    for &label in labels {
        counts[label] += 1;
    }
    Ok(impurity_from_counts(&counts, labels.len(), criterion))
}

/// Impurity from per-class counts. `total` must equal the sum of `counts`
/// and be nonzero. Zero counts are skipped, so trailing zero classes do not
/// change the result.
pub(crate) fn impurity_from_counts(counts: &[usize], total: usize, criterion: Criterion) -> f64 {
    let total = total as f64;
    match criterion {
        Criterion::Entropy => {
            let mut h = 0.0;
            for &c in counts {
                if c > 0 {
                    let p = c as f64 / total;
                    h -= p * p.log2();
                }
            }
            // -0.0 for pure sets
            h.max(0.0)
        }
        Criterion::Gini => {
            let mut sum_sq = 0.0;
            for &c in counts {
                if c > 0 {
                    let p = c as f64 / total;
                    sum_sq += p * p;
                }
            }
            (1.0 - sum_sq).max(0.0)
        }
    }
}

/// A binary split: samples with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
}

impl Split {
    #[inline]
    pub fn goes_left(&self, features: &[f64]) -> bool {
        features[self.feature] <= self.threshold
    }
}

// Exact comparison: a rebuild happens whenever either part moves at all.
impl PartialEq for Split {
    fn eq(&self, other: &Self) -> bool {
        self.feature == other.feature && self.threshold.to_bits() == other.threshold.to_bits()
    }
}

impl Eq for Split {}

/// One sample as seen by the split search.
#[derive(Debug, Clone, Copy)]
pub struct Observation<'a> {
    pub id: RowId,
    pub features: &'a [f64],
    pub label: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    value: f64,
    id: RowId,
    label: u32,
}

impl Entry {
    #[inline]
    fn cmp_key(&self, other: &Entry) -> Ordering {
        self.value.total_cmp(&other.value).then_with(|| self.id.cmp(&other.id))
    }
}

/// Per-feature orderings of a node's samples, ascending by value with ties
/// ordered by row id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SortedColumns {
    features: Vec<usize>,
    columns: Vec<Vec<Entry>>,
}

impl SortedColumns {
    /// Sorts `observations` on each of `features` from scratch.
    pub fn sort(observations: &[Observation<'_>], features: &[usize]) -> Self {
        let mut features = features.to_vec();
        features.sort_unstable();
        features.dedup();
        let columns = features
            .iter()
            .map(|&f| {
                let mut column: Vec<Entry> = observations
                    .iter()
                    .map(|o| Entry {
                        // folds -0.0 into 0.0 so total_cmp agrees with `<=`
                        value: o.features[f] + 0.0,
                        id: o.id,
                        label: o.label as u32,
                    })
                    .collect();
                column.sort_unstable_by(Entry::cmp_key);
                column
            })
            .collect();
        SortedColumns { features, columns }
    }

    /// Feature indices covered, ascending.
    pub fn features(&self) -> &[usize] {
        &self.features
    }

    /// Number of samples in every column.
    pub fn len(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row ids ordered by `feature`, or `None` if the feature is not covered.
    pub fn ids(&self, feature: usize) -> Option<Vec<RowId>> {
        let pos = self.features.binary_search(&feature).ok()?;
        Some(self.columns[pos].iter().map(|e| e.id).collect())
    }

    /// Label counts over the covered samples.
    pub fn class_counts(&self, n_classes: usize) -> Vec<usize> {
        let mut counts = vec![0usize; n_classes];
        if let Some(col) = self.columns.first() {
            for e in col {
                counts[e.label as usize] += 1;
            }
        }
        counts
    }

    /// Drops every entry whose id is in `forgotten`, returning how many
    /// entries left each column.
    pub(crate) fn discard(&mut self, forgotten: &ForgetSet) -> usize {
        let mut removed = 0;
        for column in &mut self.columns {
            let before = column.len();
            column.retain(|e| !forgotten.contains(e.id));
            removed = before - column.len();
        }
        removed
    }

    fn merge(self, incoming: SortedColumns) -> SortedColumns {
        debug_assert_eq!(self.features, incoming.features);
        let columns = self
            .columns
            .into_iter()
            .zip(incoming.columns)
            .map(|(old, new)| merge_runs(old, new))
            .collect();
        SortedColumns {
            features: self.features,
            columns,
        }
    }
}

fn merge_runs(old: Vec<Entry>, new: Vec<Entry>) -> Vec<Entry> {
    if new.is_empty() {
        return old;
    }
    if old.is_empty() {
        return new;
    }
    let mut out = Vec::with_capacity(old.len() + new.len());
    let (mut i, mut j) = (0, 0);
    while i < old.len() && j < new.len() {
        if old[i].cmp_key(&new[j]) != Ordering::Greater {
            out.push(old[i]);
            i += 1;
        } else {
            out.push(new[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&old[i..]);
    out.extend_from_slice(&new[j..]);
    out
}

/// Set of row ids to drop, stored as a bitmap over the id span.
#[derive(Debug, Clone, Default)]
pub struct ForgetSet {
    base: RowId,
    mask: Vec<bool>,
    len: usize,
}

impl ForgetSet {
    pub fn new<I: IntoIterator<Item = RowId>>(ids: I) -> Self {
        let ids: Vec<RowId> = ids.into_iter().collect();
        let (Some(&lo), Some(&hi)) = (ids.iter().min(), ids.iter().max()) else {
            return ForgetSet::default();
        };
        let mut mask = vec![false; (hi - lo + 1) as usize];
        let mut len = 0;
        for id in ids {
            let slot = &mut mask[(id - lo) as usize];
            if !*slot {
                *slot = true;
                len += 1;
            }
        }
        ForgetSet { base: lo, mask, len }
    }

    #[inline]
    pub fn contains(&self, id: RowId) -> bool {
        id >= self.base && self.mask.get((id - self.base) as usize).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = RowId> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(move |(i, _)| self.base + i as RowId)
    }
}

/// Result of a split search: the node's sorted columns and the chosen split.
#[derive(Debug, Clone)]
pub struct SplitSearch {
    pub columns: SortedColumns,
    pub split: Split,
    /// Size-weighted impurity of the two sides.
    pub score: f64,
}

/// Sorts `observations` on `features` and finds the split minimising the
/// size-weighted impurity of the two sides.
pub fn min_g(
    observations: &[Observation<'_>],
    features: &[usize],
    n_classes: usize,
    criterion: Criterion,
) -> Result<SplitSearch> {
    if observations.len() < 2 {
        return Err(Error::TooFewSamples(observations.len()));
    }
    let columns = SortedColumns::sort(observations, features);
    let (split, score) = best_split(&columns, n_classes, criterion)?;
    Ok(SplitSearch { columns, split, score })
}

/// Incremental counterpart of [`min_g`]: `prior` must already have forgotten
/// rows removed. Only `incoming` is sorted; it is then merged into `prior`.
pub fn min_g_inc(
    incoming: &[Observation<'_>],
    prior: SortedColumns,
    n_classes: usize,
    criterion: Criterion,
) -> Result<SplitSearch> {
    let fresh = SortedColumns::sort(incoming, &prior.features);
    let columns = prior.merge(fresh);
    if columns.len() < 2 {
        return Err(Error::TooFewSamples(columns.len()));
    }
    let (split, score) = best_split(&columns, n_classes, criterion)?;
    Ok(SplitSearch { columns, split, score })
}

/// Deletes `forgotten` from every column, keeping relative order.
///
/// Every forgotten id must be present.
pub fn remove_forgotten(mut prior: SortedColumns, forgotten: &ForgetSet) -> Result<SortedColumns> {
    if forgotten.is_empty() {
        return Ok(prior);
    }
    let mut seen = vec![false; forgotten.mask.len()];
    if let Some(col) = prior.columns.first() {
        for e in col.iter().filter(|e| forgotten.contains(e.id)) {
            seen[(e.id - forgotten.base) as usize] = true;
        }
    }
    if let Some(id) = forgotten.iter().find(|id| !seen[(id - forgotten.base) as usize]) {
        return Err(Error::UnknownIdentifier(id));
    }
    prior.discard(forgotten);
    Ok(prior)
}

fn best_split(columns: &SortedColumns, n_classes: usize, criterion: Criterion) -> Result<(Split, f64)> {
    let n = columns.len();
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    let total = columns.class_counts(n_classes);
    let mut best: Option<(Split, f64)> = None;
    let mut left = vec![0usize; n_classes];
    let mut right = vec![0usize; n_classes];

    for (&feature, column) in columns.features.iter().zip(&columns.columns) {
        left.iter_mut().for_each(|c| *c = 0);
        right.copy_from_slice(&total);
        for i in 0..n - 1 {
            let label = column[i].label as usize;
            left[label] += 1;
            right[label] -= 1;
            let (lo, hi) = (column[i].value, column[i + 1].value);
            if lo < hi {
                let n_left = i + 1;
                let n_right = n - n_left;
                let score = (n_left as f64 * impurity_from_counts(&left, n_left, criterion)
                    + n_right as f64 * impurity_from_counts(&right, n_right, criterion))
                    / n as f64;
                if best.as_ref().is_none_or(|(_, s)| score < *s) {
                    best = Some((
                        Split {
                            feature,
                            threshold: midpoint(lo, hi),
                        },
                        score,
                    ));
                }
            }
        }
    }
    best.ok_or(Error::Unsplittable)
}

/// Midpoint of two distinct values, never equal to the upper one.
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid < hi && mid >= lo {
        mid
    } else {
        lo
    }
}

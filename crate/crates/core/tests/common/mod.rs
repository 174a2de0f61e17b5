#![allow(dead_code)]

use forgetful::splitter::Criterion;
use forgetful::Sample;
use rand::Rng;

/// Impurity from class counts, written out independently of the library.
pub fn impurity(counts: &[usize], total: usize, criterion: Criterion) -> f64 {
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
            h.max(0.0)
        }
        Criterion::Gini => {
            let mut s = 0.0;
            for &c in counts {
                if c > 0 {
                    let p = c as f64 / total;
                    s += p * p;
                }
            }
            (1.0 - s).max(0.0)
        }
    }
}

pub fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid < hi && mid >= lo {
        mid
    } else {
        lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteSplit {
    pub feature: usize,
    pub threshold: f64,
    pub score: f64,
}

/// Tries every feature and every threshold between adjacent distinct
/// values, partitioning the rows afresh for each candidate. Keeps the first
/// strictly best candidate in (feature, threshold) order.
pub fn brute_force_split(
    rows: &[(&[f64], usize)],
    features: &[usize],
    n_classes: usize,
    criterion: Criterion,
) -> Option<BruteSplit> {
    let n = rows.len();
    if n < 2 {
        return None;
    }
    let mut best: Option<BruteSplit> = None;
    let mut features = features.to_vec();
    features.sort_unstable();
    features.dedup();
    for &f in &features {
        let mut values: Vec<f64> = rows.iter().map(|(x, _)| x[f]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup_by(|a, b| a == b);
        for w in values.windows(2) {
            let threshold = midpoint(w[0], w[1]);
            let mut left = vec![0usize; n_classes];
            let mut right = vec![0usize; n_classes];
            for (x, y) in rows {
                if x[f] <= threshold {
                    left[*y] += 1;
                } else {
                    right[*y] += 1;
                }
            }
            let nl: usize = left.iter().sum();
            let nr = n - nl;
            let score =
                (nl as f64 * impurity(&left, nl, criterion) + nr as f64 * impurity(&right, nr, criterion)) / n as f64;
            if best.is_none_or(|b| score < b.score) {
                best = Some(BruteSplit {
                    feature: f,
                    threshold,
                    score,
                });
            }
        }
    }
    best
}

/// Same contract as [`brute_force_split`], by sorting each feature and
/// sweeping class counts.
pub fn sweep_split(
    rows: &[(&[f64], usize)],
    features: &[usize],
    n_classes: usize,
    criterion: Criterion,
) -> Option<BruteSplit> {
    let n = rows.len();
    if n < 2 {
        return None;
    }
    let mut total = vec![0usize; n_classes];
    for (_, y) in rows {
        total[*y] += 1;
    }
    let mut features = features.to_vec();
    features.sort_unstable();
    features.dedup();
    let mut best: Option<BruteSplit> = None;
    let mut order: Vec<usize> = (0..n).collect();
    for &f in &features {
        order.sort_by(|&a, &b| rows[a].0[f].total_cmp(&rows[b].0[f]));
        let mut left = vec![0usize; n_classes];
        let mut right = total.clone();
        for k in 0..n - 1 {
            let y = rows[order[k]].1;
            left[y] += 1;
            right[y] -= 1;
            let (lo, hi) = (rows[order[k]].0[f], rows[order[k + 1]].0[f]);
            if lo < hi {
                let (nl, nr) = (k + 1, n - k - 1);
                let score = (nl as f64 * impurity(&left, nl, criterion) + nr as f64 * impurity(&right, nr, criterion))
                    / n as f64;
                if best.is_none_or(|b| score < b.score) {
                    best = Some(BruteSplit {
                        feature: f,
                        threshold: midpoint(lo, hi),
                        score,
                    });
                }
            }
        }
    }
    best
}

/// Plain recursive CART used as a from-scratch reference.
#[derive(Debug, Clone)]
pub enum NaiveTree {
    Leaf(usize),
    Split {
        feature: usize,
        threshold: f64,
        left: Box<NaiveTree>,
        right: Box<NaiveTree>,
    },
}

fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (c, &v) in counts.iter().enumerate() {
        if v > counts[best] {
            best = c;
        }
    }
    best
}

impl NaiveTree {
    pub fn fit(
        rows: &[(&[f64], usize)],
        features: &[usize],
        n_classes: usize,
        criterion: Criterion,
        max_height: usize,
    ) -> NaiveTree {
        Self::grow(rows, features, n_classes, criterion, max_height, 0)
    }

    fn grow(
        rows: &[(&[f64], usize)],
        features: &[usize],
        n_classes: usize,
        criterion: Criterion,
        max_height: usize,
        depth: usize,
    ) -> NaiveTree {
        let mut counts = vec![0usize; n_classes];
        for (_, y) in rows {
            counts[*y] += 1;
        }
        let label = majority(&counts);
        if depth >= max_height || counts.iter().filter(|&&c| c > 0).count() <= 1 {
            return NaiveTree::Leaf(label);
        }
        let Some(split) = sweep_split(rows, features, n_classes, criterion) else {
            return NaiveTree::Leaf(label);
        };
        let (l, r): (Vec<_>, Vec<_>) = rows.iter().partition(|(x, _)| x[split.feature] <= split.threshold);
        NaiveTree::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: Box::new(Self::grow(&l, features, n_classes, criterion, max_height, depth + 1)),
            right: Box::new(Self::grow(&r, features, n_classes, criterion, max_height, depth + 1)),
        }
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        match self {
            NaiveTree::Leaf(c) => *c,
            NaiveTree::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if x[*feature] <= *threshold {
                    left.predict(x)
                } else {
                    right.predict(x)
                }
            }
        }
    }
}

pub fn as_rows(samples: &[Sample]) -> Vec<(&[f64], usize)> {
    samples.iter().map(|s| (s.features.as_slice(), s.label)).collect()
}

/// Feature value drawn from a small grid (to create ties) or a continuous
/// range, depending on the column.
pub fn random_value<R: Rng>(rng: &mut R, feature: usize) -> f64 {
    match feature % 3 {
        0 => rng.random_range(0..4) as f64,
        1 => rng.random_range(-1.0..1.0),
        _ => (rng.random_range(0..20) as f64) / 4.0,
    }
}

/// A stream whose label follows a random linear rule on two features, with
/// the rule redrawn halfway through and a bit of label noise.
pub fn random_stream<R: Rng>(rng: &mut R, n: usize, n_features: usize, n_classes: usize) -> Vec<Sample> {
    let rule = |rng: &mut R| {
        (
            rng.random_range(0..n_features),
            rng.random_range(0..n_features),
            rng.random_range(0.5..2.0),
        )
    };
    let first = rule(rng);
    let second = rule(rng);
    (0..n)
        .map(|i| {
            let features: Vec<f64> = (0..n_features).map(|f| random_value(rng, f)).collect();
            let (a, b, w) = if i < n / 2 { first } else { second };
            let score = features[a] + w * features[b];
            let mut label = ((score.abs() * 1.7) as usize) % n_classes;
            if rng.random_bool(0.05) {
                label = rng.random_range(0..n_classes);
            }
            Sample {
                id: i as u64,
                features,
                label,
            }
        })
        .collect()
}

pub fn probes<R: Rng>(rng: &mut R, count: usize, n_features: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| (0..n_features).map(|f| random_value(rng, f)).collect())
        .collect()
}

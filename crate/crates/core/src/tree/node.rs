use crate::error::Error;
use crate::splitter::{min_g, min_g_inc, Criterion, ForgetSet, Observation, RowId, SortedColumns, Split};

use super::store::RowStore;

/// Read-only state shared by one build or update pass.
pub(crate) struct Ctx<'a> {
    pub store: &'a RowStore,
    pub features: &'a [usize],
    pub n_classes: usize,
    pub criterion: Criterion,
    pub max_height: usize,
    /// False when the height limit is the same as on the previous pass, so
    /// untouched subtrees can be skipped.
    pub height_changed: bool,
}

#[derive(Debug, Clone)]
pub(crate) enum NodeKind {
    Leaf {
        label: usize,
    },
    Internal {
        split: Split,
        left: Box<Node>,
        right: Box<Node>,
    },
}

#[derive(Debug, Clone)]
pub(crate) struct Node {
    /// Retained rows in arrival order.
    pub retained: Vec<RowId>,
    pub counts: Vec<usize>,
    /// Present on internal nodes only.
    pub sorted: Option<SortedColumns>,
    pub kind: NodeKind,
}

/// Most frequent class; ties resolve to the lowest index.
pub(crate) fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (class, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = class;
        }
    }
    best
}

fn is_pure(counts: &[usize]) -> bool {
    counts.iter().filter(|&&c| c > 0).count() <= 1
}

fn observations<'a>(store: &'a RowStore, ids: &[RowId]) -> Vec<Observation<'a>> {
    ids.iter().map(|&id| store.observation(id)).collect()
}

fn partition(store: &RowStore, ids: &[RowId], split: &Split) -> (Vec<RowId>, Vec<RowId>) {
    ids.iter().partition(|&&id| split.goes_left(store.features(id)))
}

impl Node {
    fn leaf(retained: Vec<RowId>, counts: Vec<usize>) -> Node {
        let label = majority(&counts);
        Node {
            retained,
            counts,
            sorted: None,
            kind: NodeKind::Leaf { label },
        }
    }

    /// Builds a subtree from scratch; every internal node sorts its own rows.
    pub fn build(retained: Vec<RowId>, depth: usize, ctx: &Ctx<'_>) -> Node {
        let mut counts = vec![0usize; ctx.n_classes];
        for &id in &retained {
            counts[ctx.store.label(id)] += 1;
        }
        if depth >= ctx.max_height || is_pure(&counts) {
            return Node::leaf(retained, counts);
        }
        let obs = observations(ctx.store, &retained);
        let search = match min_g(&obs, ctx.features, ctx.n_classes, ctx.criterion) {
            Ok(s) => s,
            Err(Error::Unsplittable | Error::TooFewSamples(_)) => return Node::leaf(retained, counts),
            Err(e) => unreachable!("split search failed: {e}"),
        };
        drop(obs);
        let (l, r) = partition(ctx.store, &retained, &search.split);
        Node {
            kind: NodeKind::Internal {
                split: search.split,
                left: Box::new(Node::build(l, depth + 1, ctx)),
                right: Box::new(Node::build(r, depth + 1, ctx)),
            },
            retained,
            counts,
            sorted: Some(search.columns),
        }
    }

    /// Forgets `forget ∩ retained`, appends `incoming`, then keeps the
    /// current split if it is still the best one or rebuilds below here.
    pub fn update(&mut self, incoming: &[RowId], forget: &ForgetSet, depth: usize, ctx: &Ctx<'_>) {
        let before = self.retained.len();
        if !forget.is_empty() {
            let store = ctx.store;
            let counts = &mut self.counts;
            self.retained.retain(|&id| {
                if forget.contains(id) {
                    // forgotten rows stay in the store until the pass ends
                    counts[store.label(id)] -= 1;
                    false
                } else {
                    true
                }
            });
        }
        let removed = before - self.retained.len();
        if removed == 0 && incoming.is_empty() && !ctx.height_changed {
            return;
        }
        for &id in incoming {
            self.counts[ctx.store.label(id)] += 1;
        }
        self.retained.extend_from_slice(incoming);

        if depth >= ctx.max_height || is_pure(&self.counts) {
            self.make_leaf();
            return;
        }

        let search = match self.sorted.take() {
            Some(mut prior) => {
                if removed > 0 {
                    let dropped = prior.discard(forget);
                    debug_assert_eq!(dropped, removed);
                }
                let obs = observations(ctx.store, incoming);
                min_g_inc(&obs, prior, ctx.n_classes, ctx.criterion)
            }
            None => {
                let obs = observations(ctx.store, &self.retained);
                min_g(&obs, ctx.features, ctx.n_classes, ctx.criterion)
            }
        };
        let search = match search {
            Ok(s) => s,
            Err(Error::Unsplittable | Error::TooFewSamples(_)) => {
                self.make_leaf();
                return;
            }
            Err(e) => unreachable!("split search failed: {e}"),
        };

        match &mut self.kind {
            NodeKind::Internal { split, left, right } if *split == search.split => {
                let (l, r) = partition(ctx.store, incoming, split);
                left.update(&l, forget, depth + 1, ctx);
                right.update(&r, forget, depth + 1, ctx);
            }
            _ => {
                let (l, r) = partition(ctx.store, &self.retained, &search.split);
                self.kind = NodeKind::Internal {
                    split: search.split,
                    left: Box::new(Node::build(l, depth + 1, ctx)),
                    right: Box::new(Node::build(r, depth + 1, ctx)),
                };
            }
        }
        self.sorted = Some(search.columns);
    }

    fn make_leaf(&mut self) {
        self.sorted = None;
        self.kind = NodeKind::Leaf {
            label: majority(&self.counts),
        };
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let mut node = self;
        loop {
            match &node.kind {
                NodeKind::Leaf { label } => return *label,
                NodeKind::Internal { split, left, right } => {
                    node = if split.goes_left(x) { left } else { right };
                }
            }
        }
    }

    pub fn height(&self) -> usize {
        match &self.kind {
            NodeKind::Leaf { .. } => 0,
            NodeKind::Internal { left, right, .. } => 1 + left.height().max(right.height()),
        }
    }

    pub fn n_leaves(&self) -> usize {
        match &self.kind {
            NodeKind::Leaf { .. } => 1,
            NodeKind::Internal { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }
}

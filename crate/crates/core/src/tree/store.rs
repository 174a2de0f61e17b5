use std::collections::VecDeque;

use crate::splitter::{Observation, RowId};

#[derive(Debug, Clone)]
struct Row {
    features: Box<[f64]>,
    label: usize,
}

/// Rows owned by one tree, addressed by sequential ids.
///
/// Slots between the oldest live row and the newest one are kept even when
/// dead, so lookups are a subtraction and an index.
#[derive(Debug, Clone, Default)]
pub(crate) struct RowStore {
    base: RowId,
    slots: VecDeque<Option<Row>>,
    live: usize,
}

impl RowStore {
    pub fn insert(&mut self, features: &[f64], label: usize) -> RowId {
        let id = self.base + self.slots.len() as RowId;
        self.slots.push_back(Some(Row {
            features: features.into(),
            label,
        }));
        self.live += 1;
        id
    }

    #[inline]
    fn slot(&self, id: RowId) -> Option<&Row> {
        let offset = id.checked_sub(self.base)? as usize;
        self.slots.get(offset)?.as_ref()
    }

    #[inline]
    pub fn features(&self, id: RowId) -> &[f64] {
        &self.slot(id).expect("row id not live").features
    }

    #[inline]
    pub fn label(&self, id: RowId) -> usize {
        self.slot(id).expect("row id not live").label
    }

    #[inline]
    pub fn observation(&self, id: RowId) -> Observation<'_> {
        let row = self.slot(id).expect("row id not live");
        Observation {
            id,
            features: &row.features,
            label: row.label,
        }
    }

    pub fn remove(&mut self, id: RowId) {
        if let Some(offset) = id.checked_sub(self.base) {
            if let Some(slot) = self.slots.get_mut(offset as usize) {
                if slot.take().is_some() {
                    self.live -= 1;
                }
            }
        }
        while matches!(self.slots.front(), Some(None)) {
            self.slots.pop_front();
            self.base += 1;
        }
    }

    pub fn len(&self) -> usize {
        self.live
    }
}

use std::collections::BTreeMap;

use super::{Mitigation, MitigationDecision, RowAddress, SimRng, Tracker};
use crate::error::{invalid, Result};

/// Counter-based summary tracker (Mithril style) over `E` entries.
#[derive(Debug, Clone)]
pub struct MisraGries {
    capacity: usize,
    entries: BTreeMap<RowAddress, u64>,
}

impl MisraGries {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(invalid("Misra-Gries summary needs at least one entry"));
        }
        Ok(Self {
            capacity,
            entries: BTreeMap::new(),
        })
    }

    pub fn summary(&self) -> &BTreeMap<RowAddress, u64> {
        &self.entries
    }

    fn insert(&mut self, row: RowAddress) {
        if let Some(c) = self.entries.get_mut(&row) {
            *c += 1;
        } else if self.entries.len() < self.capacity {
            self.entries.insert(row, 1);
        } else {
            self.entries.retain(|_, c| {
                *c -= 1;
                *c > 0
            });
        }
    }
}

impl Tracker for MisraGries {
    fn name(&self) -> &'static str {
        "misra_gries"
    }

    fn observe_activation(&mut self, row: RowAddress, _rng: &mut SimRng) -> Result<()> {
        self.insert(row);
        Ok(())
    }

    fn on_refresh(&mut self, _rng: &mut SimRng) -> MitigationDecision {
        let min = *self.entries.values().min()?;
        // BTreeMap iterates in address order, so max_by_key's last-wins rule is reversed.
        let (&row, &count) = self
            .entries
            .iter()
            .rev()
            .max_by_key(|(_, &c)| c)?;
        if count == 0 {
            return None;
        }
        let left = count - min;
        if left == 0 {
            self.entries.remove(&row);
        } else {
            self.entries.insert(row, left);
        }
        Some(Mitigation::direct(row))
    }

    fn observe_victim_refresh(&mut self, row: RowAddress) {
        self.insert(row);
    }

    fn on_window_refresh(&mut self) {
        self.entries.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trackers::test_util::*;
    use crate::trackers::{Prct, Tracker};
    use proptest::prelude::*;

    #[test]
    fn two_entries_keep_exact_counts() {
        let mut r = rng(1);
        let mut t = MisraGries::new(2).unwrap();
        for a in rows(&[1, 1, 2]) {
            t.observe_activation(a, &mut r).unwrap();
        }
        assert_eq!(t.summary().get(&row(1)), Some(&2));
        assert_eq!(t.summary().get(&row(2)), Some(&1));
        assert_eq!(t.on_refresh(&mut r), Some(Mitigation::direct(row(1))));
        assert_eq!(t.summary().get(&row(1)), Some(&1));
    }

    #[test]
    fn single_entry_decrements_to_empty() {
        let mut r = rng(2);
        let mut t = MisraGries::new(1).unwrap();
        for a in rows(&[1, 2]) {
            t.observe_activation(a, &mut r).unwrap();
        }
        assert!(t.summary().is_empty());
        assert_eq!(t.on_refresh(&mut r), None);
    }

    #[test]
    fn ties_go_to_lowest_address() {
        let mut r = rng(3);
        let mut t = MisraGries::new(4).unwrap();
        for a in rows(&[9, 4, 7]) {
            t.observe_activation(a, &mut r).unwrap();
        }
        assert_eq!(t.on_refresh(&mut r).unwrap().row, row(4));
    }

    proptest! {
        #[test]
        fn exact_when_capacity_suffices(acts in prop::collection::vec(0u32..8, 0..200)) {
            let mut r = rng(4);
            let mut mg = MisraGries::new(8).unwrap();
            let mut prct = Prct::new();
            for &a in &acts {
                mg.observe_activation(row(a), &mut r).unwrap();
                prct.observe_activation(row(a), &mut r).unwrap();
            }
            for v in 0..8 {
                prop_assert_eq!(mg.summary().get(&row(v)).copied().unwrap_or(0), prct.count(row(v)));
            }
            prop_assert_eq!(mg.on_refresh(&mut r), prct.on_refresh(&mut r));
        }

        #[test]
        fn never_exceeds_capacity(acts in prop::collection::vec(0u32..50, 0..300), e in 1usize..6) {
            let mut r = rng(5);
            let mut mg = MisraGries::new(e).unwrap();
            for &a in &acts {
                mg.observe_activation(row(a), &mut r).unwrap();
                prop_assert!(mg.summary().len() <= e);
            }
        }
    }
}

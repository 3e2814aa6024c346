use std::cmp::Reverse;
use std::collections::{BTreeSet, HashMap};

use super::{Mitigation, MitigationDecision, RowAddress, SimRng, Tracker};
use crate::error::Result;

/// Per-Row Counter Table: one exact counter per row, mitigating the maximum.
///
/// Counters are kept in a map plus an ordered index so the argmax at each REF
/// is logarithmic. Ties go to the lowest row address.
#[derive(Debug, Clone, Default)]
pub struct Prct {
    counts: HashMap<RowAddress, u64>,
    order: BTreeSet<(Reverse<u64>, RowAddress)>,
}

impl Prct {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self, row: RowAddress) -> u64 {
        self.counts.get(&row).copied().unwrap_or(0)
    }

    pub fn tracked_rows(&self) -> usize {
        self.counts.len()
    }

    fn bump(&mut self, row: RowAddress) {
        let c = self.counts.entry(row).or_insert(0);
        if *c > 0 {
            self.order.remove(&(Reverse(*c), row));
        }
        *c += 1;
        self.order.insert((Reverse(*c), row));
    }
}

impl Tracker for Prct {
    fn name(&self) -> &'static str {
        "prct"
    }

    fn observe_activation(&mut self, row: RowAddress, _rng: &mut SimRng) -> Result<()> {
        self.bump(row);
        Ok(())
    }

    fn on_refresh(&mut self, _rng: &mut SimRng) -> MitigationDecision {
        let (_, row) = self.order.pop_first()?;
        self.counts.remove(&row);
        Some(Mitigation::direct(row))
    }

    fn observe_victim_refresh(&mut self, row: RowAddress) {
        self.bump(row);
    }

    fn on_window_refresh(&mut self) {
        self.counts.clear();
        self.order.clear();
    }
}

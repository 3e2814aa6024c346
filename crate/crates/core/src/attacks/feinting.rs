use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use super::{attack_row, ActivationSource};
use crate::error::{invalid, Result};
use crate::trackers::RowAddress;

/// Water-filling adversary against a tracker that mitigates the highest
/// count at every REF.
///
/// Each tREFI the M activations go, one at a time, to the surviving row with
/// the lowest count. The adversary then predicts the row the tracker will
/// remove (the highest count, lowest address among ties) from its own
/// bookkeeping and drops it from the pool.
#[derive(Debug, Clone)]
pub struct FeintingAdversary {
    max_act: u32,
    pool_size: u32,
    counts: Vec<u64>,
    rows: Vec<RowAddress>,
    alive: BinaryHeap<Reverse<(u64, u32)>>,
    removed: Vec<bool>,
    by_count: BTreeSet<(Reverse<u64>, u32)>,
    peak: u64,
    final_pair: Option<(u64, u64)>,
}

impl FeintingAdversary {
    pub fn new(max_act: u32, pool_size: u32) -> Result<Self> {
        if max_act == 0 || pool_size < 2 {
            return Err(invalid("feinting needs M >= 1 and a pool of at least two rows"));
        }
        let rows = (0..pool_size).map(attack_row).collect::<Result<Vec<_>>>()?;
        let mut adv = Self {
            max_act,
            pool_size,
            counts: Vec::new(),
            rows,
            alive: BinaryHeap::new(),
            removed: Vec::new(),
            by_count: BTreeSet::new(),
            peak: 0,
            final_pair: None,
        };
        adv.reset();
        Ok(adv)
    }

    /// Rows still in the pool.
    pub fn survivors(&self) -> usize {
        self.by_count.len()
    }

    /// Highest count any row reached before removal.
    pub fn peak(&self) -> u64 {
        self.peak
    }

    /// Counts of the last two rows at the REF that left two survivors.
    pub fn final_pair(&self) -> Option<(u64, u64)> {
        self.final_pair
    }

    pub fn count(&self, row: RowAddress) -> Option<u64> {
        let i = self.rows.iter().position(|&r| r == row)?;
        Some(self.counts[i])
    }
}

impl ActivationSource for FeintingAdversary {
    fn fill_refi(&mut self, _refi: u64, out: &mut Vec<RowAddress>) {
        let mut issued = 0;
        while issued < self.max_act {
            let Some(Reverse((c, i))) = self.alive.pop() else {
                return;
            };
            if self.removed[i as usize] {
                continue;
            }
            self.by_count.remove(&(Reverse(c), i));
            self.counts[i as usize] = c + 1;
            self.peak = self.peak.max(c + 1);
            self.alive.push(Reverse((c + 1, i)));
            self.by_count.insert((Reverse(c + 1), i));
            out.push(self.rows[i as usize]);
            issued += 1;
        }
        if self.by_count.len() == 2 {
            let mut it = self.by_count.iter();
            let a = it.next().map(|e| e.0 .0).unwrap_or(0);
            let b = it.next().map(|e| e.0 .0).unwrap_or(0);
            self.final_pair = Some((a, b));
        }
        if let Some(&(Reverse(c), i)) = self.by_count.iter().next() {
            self.by_count.remove(&(Reverse(c), i));
            self.removed[i as usize] = true;
        }
    }

    fn reset(&mut self) {
        self.counts = vec![0; self.pool_size as usize];
        self.removed = vec![false; self.pool_size as usize];
        self.alive = (0..self.pool_size).map(|i| Reverse((0, i))).collect();
        self.by_count = (0..self.pool_size).map(|i| (Reverse(0), i)).collect();
        self.peak = 0;
        self.final_pair = None;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::feinting_limit;

    fn play(m: u32, n: u32) -> FeintingAdversary {
        let mut adv = FeintingAdversary::new(m, n).unwrap();
        let mut out = Vec::new();
        for refi in 0..n as u64 {
            out.clear();
            adv.fill_refi(refi, &mut out);
        }
        adv
    }

    #[test]
    fn matches_level_structure() {
        for (m, n) in [(2, 2), (73, 2), (5, 7), (73, 300), (8, 64)] {
            let adv = play(m, n);
            let f = feinting_limit(m as u64, n as u64).unwrap();
            assert_eq!(adv.final_pair(), Some(f.final_pair), "M={m} N={n}");
            assert_eq!(adv.survivors(), 0);
        }
    }
}

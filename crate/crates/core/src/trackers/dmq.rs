use std::collections::VecDeque;

use super::{Mitigation, MitigationDecision, RowAddress, SimRng, Tracker};
use crate::error::{invalid, violation, Result};

/// Entries in the Delayed Mitigation Queue.
pub const DMQ_CAPACITY: usize = 4;

#[derive(Debug, Clone, Copy)]
struct Pending {
    mitigation: Mitigation,
    acts_waited: u64,
    row_acts_waited: u64,
}

/// Exposure observed by rows while they waited in the queue.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DmqStats {
    pub pseudo_mitigations: u64,
    /// Most activations (to any row) between a pseudo-mitigation and its REF.
    pub max_wait_acts: u64,
    /// Most activations to the queued row itself while it waited.
    pub max_row_acts: u64,
}

/// Wraps a tracker so selections made between postponed REFs are queued
/// instead of lost.
///
/// Every time the activation count since the last REF passes M, the inner
/// tracker is asked for its current selection (a pseudo-mitigation) and the
/// result enters the FIFO. A REF mitigates the queue head when there is one;
/// the inner tracker still sees the REF, so its SAR is cleared and the
/// selection it held for that REF is dropped.
#[derive(Debug)]
pub struct Dmq<T> {
    inner: T,
    slots: u32,
    num_acts: u32,
    queue: VecDeque<Pending>,
    stats: DmqStats,
}

impl<T: Tracker> Dmq<T> {
    pub fn new(inner: T, slots: u32) -> Result<Self> {
        if slots == 0 {
            return Err(invalid("DMQ needs a positive MaxACT"));
        }
        Ok(Self {
            inner,
            slots,
            num_acts: 0,
            queue: VecDeque::with_capacity(DMQ_CAPACITY),
            stats: DmqStats::default(),
        })
    }

    pub fn inner(&self) -> &T {
        &self.inner
    }

    pub fn queued(&self) -> impl Iterator<Item = Mitigation> + '_ {
        self.queue.iter().map(|p| p.mitigation)
    }

    pub fn stats(&self) -> DmqStats {
        self.stats
    }

    fn push(&mut self, mitigation: Mitigation) -> Result<()> {
        if self.queue.len() == DMQ_CAPACITY {
            return Err(violation("DMQ overflow: more than four pseudo-mitigations pending"));
        }
        self.stats.pseudo_mitigations += 1;
        self.queue.push_back(Pending {
            mitigation,
            acts_waited: 0,
            row_acts_waited: 0,
        });
        Ok(())
    }
}

impl<T: Tracker> Tracker for Dmq<T> {
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    fn observe_activation(&mut self, row: RowAddress, rng: &mut SimRng) -> Result<()> {
        self.num_acts += 1;
        if self.num_acts > self.slots {
            self.num_acts = 1;
            if let Some(m) = self.inner.on_refresh(rng) {
                self.push(m)?;
            }
        }
        for p in &mut self.queue {
            p.acts_waited += 1;
            if p.mitigation.row == row {
                p.row_acts_waited += 1;
            }
        }
        self.inner.observe_activation(row, rng)
    }

    fn on_refresh(&mut self, rng: &mut SimRng) -> MitigationDecision {
        self.num_acts = 0;
        let Some(head) = self.queue.pop_front() else {
            return self.inner.on_refresh(rng);
        };
        self.stats.max_wait_acts = self.stats.max_wait_acts.max(head.acts_waited);
        self.stats.max_row_acts = self.stats.max_row_acts.max(head.row_acts_waited);
        let _dropped = self.inner.on_refresh(rng);
        Some(head.mitigation)
    }

    fn observe_victim_refresh(&mut self, row: RowAddress) {
        self.inner.observe_victim_refresh(row);
    }

    fn on_window_refresh(&mut self) {
        self.inner.on_window_refresh();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dram::RefreshSchedule;
    use crate::trackers::test_util::*;
    use crate::trackers::{run_cycle, Mint, Parfm};

    #[test]
    fn timely_schedule_matches_inner_tracker() {
        let mut r1 = rng(9);
        let mut r2 = rng(9);
        let mut plain = Mint::new(73, true, &mut r1).unwrap();
        let mut wrapped = Dmq::new(Mint::new(73, true, &mut r2).unwrap(), 73).unwrap();
        for i in 0..5000u32 {
            let acts: Vec<_> = (0..(i % 74)).map(|j| row(10 + (i + j) % 50)).collect();
            let a = run_cycle(&mut plain, &acts, &mut r1).unwrap();
            let b = run_cycle(&mut wrapped, &acts, &mut r2).unwrap();
            assert_eq!(a, b);
        }
        assert_eq!(wrapped.stats().pseudo_mitigations, 0);
    }

    #[test]
    fn postponed_single_row_waits_at_most_292() {
        let mut r = rng(10);
        let sched = RefreshSchedule::max_postponed(4, 500).unwrap();
        let mut t = Dmq::new(Mint::new(73, true, &mut r).unwrap(), 73).unwrap();
        let mut mitigated = 0;
        for &refs in &sched.refs_per_refi() {
            for _ in 0..73 {
                t.observe_activation(row(3), &mut r).unwrap();
            }
            for _ in 0..refs {
                mitigated += t.on_refresh(&mut r).is_some() as u32;
            }
        }
        assert_eq!(t.stats().max_wait_acts, 292);
        assert!((380..=400).contains(&mitigated), "{mitigated}");
    }

    #[test]
    fn queue_is_fifo() {
        let mut r = rng(11);
        let mut t = Dmq::new(Parfm::new(2).unwrap(), 2).unwrap();
        for v in [1, 1, 2, 2, 3, 3, 4, 4, 5, 5] {
            t.observe_activation(row(v), &mut r).unwrap();
        }
        let order: Vec<_> = (0..5).filter_map(|_| t.on_refresh(&mut r)).map(|m| m.row.value()).collect();
        assert_eq!(order, vec![1, 2, 3, 4]);
    }

    #[test]
    fn overflow_beyond_four_postponements() {
        let mut r = rng(12);
        let mut t = Dmq::new(Parfm::new(1).unwrap(), 1).unwrap();
        for v in 0..5 {
            t.observe_activation(row(v), &mut r).unwrap();
        }
        assert!(t.observe_activation(row(9), &mut r).is_err());
    }
}

use rand::Rng;

use super::{Mitigation, MitigationDecision, OverflowPolicy, RowAddress, SimRng, Tracker};
use crate::error::{invalid, violation, Result};

/// PARFM buffers every activation of the interval and mitigates a uniform pick.
#[derive(Debug, Clone)]
pub struct Parfm {
    capacity: usize,
    overflow: OverflowPolicy,
    buffer: Vec<RowAddress>,
}

impl Parfm {
    pub fn new(slots: u32) -> Result<Self> {
        if slots == 0 {
            return Err(invalid("PARFM needs a non-empty buffer"));
        }
        Ok(Self {
            capacity: slots as usize,
            overflow: OverflowPolicy::Reject,
            buffer: Vec::with_capacity(slots as usize),
        })
    }

    pub fn with_overflow(mut self, overflow: OverflowPolicy) -> Self {
        self.overflow = overflow;
        self
    }

    pub fn buffered(&self) -> &[RowAddress] {
        &self.buffer
    }
}

impl Tracker for Parfm {
    fn name(&self) -> &'static str {
        "parfm"
    }

    fn observe_activation(&mut self, row: RowAddress, _rng: &mut SimRng) -> Result<()> {
        if self.buffer.len() == self.capacity {
            return match self.overflow {
                OverflowPolicy::Reject => Err(violation(format!(
                    "PARFM buffer of {} entries overflowed",
                    self.capacity
                ))),
                OverflowPolicy::Tolerate => Ok(()),
            };
        }
        self.buffer.push(row);
        Ok(())
    }

    fn on_refresh(&mut self, rng: &mut SimRng) -> MitigationDecision {
        if self.buffer.is_empty() {
            return None;
        }
        let pick = self.buffer[rng.gen_range(0..self.buffer.len())];
        self.buffer.clear();
        Some(Mitigation::direct(pick))
    }
}

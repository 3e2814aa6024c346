use rand::Rng;

use super::{Mitigation, MitigationDecision, OverflowPolicy, RowAddress, SimRng, Tracker};
use crate::error::{invalid, violation, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OverwritePolicy {
    /// Every sampled activation replaces the SAR.
    #[default]
    Overwrite,
    /// Sampling stops once the SAR holds a row.
    NoOverwrite,
}

/// In-DRAM PARA: each activation is sampled into the SAR with probability p.
#[derive(Debug, Clone)]
pub struct InDramPara {
    p_num: u32,
    p_den: u32,
    policy: OverwritePolicy,
    slots: u32,
    overflow: OverflowPolicy,
    seen: u32,
    sar: Option<RowAddress>,
}

impl InDramPara {
    pub fn new(p_num: u32, p_den: u32, policy: OverwritePolicy, slots: u32) -> Result<Self> {
        if p_num == 0 || p_den == 0 || p_num > p_den {
            return Err(invalid(format!("PARA probability {p_num}/{p_den} must lie in (0, 1]")));
        }
        if slots == 0 {
            return Err(invalid("PARA needs at least one slot per interval"));
        }
        Ok(Self {
            p_num,
            p_den,
            policy,
            slots,
            overflow: OverflowPolicy::Reject,
            seen: 0,
            sar: None,
        })
    }

    pub fn with_overflow(mut self, overflow: OverflowPolicy) -> Self {
        self.overflow = overflow;
        self
    }

    pub fn sar(&self) -> Option<RowAddress> {
        self.sar
    }

    pub fn probability(&self) -> f64 {
        self.p_num as f64 / self.p_den as f64
    }
}

impl Tracker for InDramPara {
    fn name(&self) -> &'static str {
        match self.policy {
            OverwritePolicy::Overwrite => "para",
            OverwritePolicy::NoOverwrite => "para_no_overwrite",
        }
    }

    fn observe_activation(&mut self, row: RowAddress, rng: &mut SimRng) -> Result<()> {
        self.seen += 1;
        if self.seen > self.slots && self.overflow == OverflowPolicy::Reject {
            return Err(violation(format!(
                "PARA observed more than {} activations in one interval",
                self.slots
            )));
        }
        if self.policy == OverwritePolicy::NoOverwrite && self.sar.is_some() {
            return Ok(());
        }
        if rng.gen_ratio(self.p_num, self.p_den) {
            self.sar = Some(row);
        }
        Ok(())
    }

    fn on_refresh(&mut self, _rng: &mut SimRng) -> MitigationDecision {
        self.seen = 0;
        self.sar.take().map(Mitigation::direct)
    }
}

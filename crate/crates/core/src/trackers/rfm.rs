use super::{MitigationDecision, RowAddress, SimRng, Tracker};
use crate::error::{invalid, Result};

/// Refresh Management: the controller counts ACTs per bank (RAA) and issues an
/// RFM command, an extra mitigation opportunity, every `rfm_th` of them.
#[derive(Debug)]
pub struct Rfm<T> {
    inner: T,
    rfm_th: u32,
    raa: u32,
    pending: bool,
    issued: u64,
}

impl<T: Tracker> Rfm<T> {
    pub fn new(inner: T, rfm_th: u32) -> Result<Self> {
        if rfm_th == 0 {
            return Err(invalid("RFM threshold must be positive"));
        }
        Ok(Self {
            inner,
            rfm_th,
            raa: 0,
            pending: false,
            issued: 0,
        })
    }

    pub fn raa(&self) -> u32 {
        self.raa
    }

    pub fn rfm_issued(&self) -> u64 {
        self.issued
    }
}

impl<T: Tracker> Tracker for Rfm<T> {
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    fn observe_activation(&mut self, row: RowAddress, rng: &mut SimRng) -> Result<()> {
        self.inner.observe_activation(row, rng)?;
        self.raa += 1;
        if self.raa >= self.rfm_th {
            self.raa = 0;
            self.pending = true;
            self.issued += 1;
        }
        Ok(())
    }

    fn on_refresh(&mut self, rng: &mut SimRng) -> MitigationDecision {
        self.inner.on_refresh(rng)
    }

    fn observe_victim_refresh(&mut self, row: RowAddress) {
        self.inner.observe_victim_refresh(row);
    }

    fn on_window_refresh(&mut self) {
        self.inner.on_window_refresh();
    }

    fn poll_rfm(&mut self, rng: &mut SimRng) -> Option<MitigationDecision> {
        if !std::mem::take(&mut self.pending) {
            return None;
        }
        Some(self.inner.on_refresh(rng))
    }
}

//! Per-bank tracker state machines.
//!
//! Every tracker observes a stream of activations and, at each REF, emits at
//! most one [`MitigationDecision`]. The DMQ and RFM wrappers are trackers too,
//! so they compose with any inner design.

mod dmq;
mod mint;
mod misra_gries;
mod para;
mod parfm;
mod prct;
mod rfm;

use std::fmt;

use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::rowpress::{EactRounding, MintRowPress};

pub use dmq::{Dmq, DmqStats, DMQ_CAPACITY};
pub use mint::{draw_san, Mint, MintState};
pub use misra_gries::MisraGries;
pub use para::{InDramPara, OverwritePolicy};
pub use parfm::Parfm;
pub use prct::Prct;
pub use rfm::Rfm;

/// The PRNG every tracker and simulation draws from.
pub type SimRng = ChaCha8Rng;

/// Row addresses carry 17 row bits plus one bit of flag headroom.
pub const ROW_ADDRESS_BITS: u32 = 18;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RowAddress(u32);

impl RowAddress {
    pub const LIMIT: u32 = 1 << ROW_ADDRESS_BITS;

    pub fn new(value: u32) -> Result<Self> {
        if value >= Self::LIMIT {
            return Err(invalid(format!("row address {value} exceeds 18 bits")));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> u32 {
        self.0
    }

    /// The row `delta` positions away, if it stays inside the address space.
    pub fn offset(self, delta: i64) -> Option<Self> {
        let v = self.0 as i64 + delta;
        (0..Self::LIMIT as i64).contains(&v).then_some(Self(v as u32))
    }
}

impl fmt::Display for RowAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A mitigation of `row`: distance 1 refreshes its neighbours, distance d ≥ 2
/// refreshes the victims d-1 steps further out (transitive mitigation).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mitigation {
    pub row: RowAddress,
    pub distance: u32,
}

impl Mitigation {
    pub fn direct(row: RowAddress) -> Self {
        Self { row, distance: 1 }
    }
}

pub type MitigationDecision = Option<Mitigation>;

/// What a tracker does with activations beyond its per-interval budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OverflowPolicy {
    /// Exceeding the budget is a contract violation.
    #[default]
    Reject,
    /// Hardware behaviour under postponement without a DMQ: slot-based trackers
    /// stop observing, sampling trackers keep sampling.
    Tolerate,
}

pub trait Tracker: Send {
    fn name(&self) -> &'static str;

    fn observe_activation(&mut self, row: RowAddress, rng: &mut SimRng) -> Result<()>;

    fn on_refresh(&mut self, rng: &mut SimRng) -> MitigationDecision;

    /// Activations caused by victim refreshes. Only counter-based trackers see them.
    fn observe_victim_refresh(&mut self, _row: RowAddress) {}

    /// Auto-refresh at the end of the refresh window.
    fn on_window_refresh(&mut self) {}

    /// Returns the decision of an RFM command issued by the last activation.
    fn poll_rfm(&mut self, _rng: &mut SimRng) -> Option<MitigationDecision> {
        None
    }
}

impl<T: Tracker + ?Sized> Tracker for Box<T> {
    fn name(&self) -> &'static str {
        (**self).name()
    }

    fn observe_activation(&mut self, row: RowAddress, rng: &mut SimRng) -> Result<()> {
        (**self).observe_activation(row, rng)
    }

    fn on_refresh(&mut self, rng: &mut SimRng) -> MitigationDecision {
        (**self).on_refresh(rng)
    }

    fn observe_victim_refresh(&mut self, row: RowAddress) {
        (**self).observe_victim_refresh(row)
    }

    fn on_window_refresh(&mut self) {
        (**self).on_window_refresh()
    }

    fn poll_rfm(&mut self, rng: &mut SimRng) -> Option<MitigationDecision> {
        (**self).poll_rfm(rng)
    }
}

/// Feeds one tREFI worth of activations and then issues the REF.
pub fn run_cycle<T: Tracker + ?Sized>(
    tracker: &mut T,
    activations: &[RowAddress],
    rng: &mut SimRng,
) -> Result<MitigationDecision> {
    for &row in activations {
        tracker.observe_activation(row, rng)?;
    }
    Ok(tracker.on_refresh(rng))
}

/// Base tracker designs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackerKind {
    Mint { transitive: bool },
    Para { p_num: u32, p_den: u32, policy: OverwritePolicy },
    Parfm,
    Prct,
    MisraGries { entries: usize },
    /// MINT with a fixed-point CAN fed unit-EACT events.
    MintRowPress { transitive: bool },
}

/// A tracker design together with its wrappers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrackerSpec {
    pub kind: TrackerKind,
    pub dmq: bool,
    /// RFM threshold and whether MINT keeps its transitive slot under RFM.
    pub rfm: Option<(u32, bool)>,
}

impl TrackerSpec {
    pub fn new(kind: TrackerKind) -> Self {
        Self {
            kind,
            dmq: false,
            rfm: None,
        }
    }

    pub fn with_dmq(mut self, dmq: bool) -> Self {
        self.dmq = dmq;
        self
    }

    pub fn with_rfm(mut self, rfm_th: u32, transitive_slot: bool) -> Self {
        self.rfm = Some((rfm_th, transitive_slot));
        self
    }

    /// Builds a fresh tracker for a bank with `slots` activations per tREFI.
    pub fn build(&self, slots: u32, overflow: OverflowPolicy, rng: &mut SimRng) -> Result<Box<dyn Tracker>> {
        let base: Box<dyn Tracker> = match (self.kind, self.rfm) {
            (TrackerKind::Mint { .. }, Some((th, slot))) => {
                Box::new(Rfm::new(Mint::new(th, slot, rng)?.with_overflow(overflow), th)?)
            }
            (_, Some(_)) => return Err(invalid("RFM co-design is modelled for MINT only")),
            (TrackerKind::Mint { transitive }, None) => {
                Box::new(Mint::new(slots, transitive, rng)?.with_overflow(overflow))
            }
            (TrackerKind::Para { p_num, p_den, policy }, None) => {
                Box::new(InDramPara::new(p_num, p_den, policy, slots)?.with_overflow(overflow))
            }
            (TrackerKind::Parfm, None) => Box::new(Parfm::new(slots)?.with_overflow(overflow)),
            (TrackerKind::Prct, None) => Box::new(Prct::new()),
            (TrackerKind::MisraGries { entries }, None) => Box::new(MisraGries::new(entries)?),
            (TrackerKind::MintRowPress { transitive }, None) => Box::new(MintRowPress::new(
                slots,
                transitive,
                crate::dram::DramTimings::default().t_rc_ns,
                EactRounding::NearestEven,
                rng,
            )?),
        };
        if self.dmq {
            Ok(Box::new(Dmq::new(base, slots)?))
        } else {
            Ok(base)
        }
    }
}

#[cfg(test)]
pub(crate) mod test_util {
    use super::*;
    use rand::SeedableRng;

    pub fn rng(seed: u64) -> SimRng {
        SimRng::seed_from_u64(seed)
    }

    pub fn row(v: u32) -> RowAddress {
        RowAddress::new(v).unwrap()
    }

    pub fn rows(vs: &[u32]) -> Vec<RowAddress> {
        vs.iter().map(|&v| row(v)).collect()
    }

    /// Binomial 3-sigma check for an empirical frequency.
    pub fn within_3_sigma(hits: u64, trials: u64, p: f64) -> bool {
        let mean = trials as f64 * p;
        let sd = (trials as f64 * p * (1.0 - p)).sqrt();
        (hits as f64 - mean).abs() <= 3.0 * sd
    }
}

#[cfg(test)]
mod tests {
    use super::test_util::*;
    use super::*;

    #[test]
    fn row_address_capacity() {
        assert!(RowAddress::new((1 << 18) - 1).is_ok());
        assert!(RowAddress::new(1 << 18).is_err());
        assert_eq!(row(5).offset(-6), None);
        assert_eq!(row(5).offset(2), Some(row(7)));
    }

    #[test]
    fn spec_builds_every_kind() {
        let mut r = rng(1);
        let kinds = [
            TrackerKind::Mint { transitive: true },
            TrackerKind::Para {
                p_num: 1,
                p_den: 73,
                policy: OverwritePolicy::Overwrite,
            },
            TrackerKind::Parfm,
            TrackerKind::Prct,
            TrackerKind::MisraGries { entries: 4 },
            TrackerKind::MintRowPress { transitive: false },
        ];
        for kind in kinds {
            for dmq in [false, true] {
                let mut t = TrackerSpec::new(kind)
                    .with_dmq(dmq)
                    .build(73, OverflowPolicy::Reject, &mut r)
                    .unwrap();
                let d = run_cycle(&mut t, &vec![row(9); 73], &mut r).unwrap();
                if !matches!(kind, TrackerKind::Para { .. }) {
                    assert_eq!(d, Some(Mitigation::direct(row(9))), "{kind:?}");
                }
            }
        }
        let rfm = TrackerSpec::new(TrackerKind::Parfm).with_rfm(32, true);
        assert!(rfm.build(73, OverflowPolicy::Reject, &mut r).is_err());
    }
}

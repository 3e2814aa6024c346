use rand::Rng;

use super::{Mitigation, MitigationDecision, OverflowPolicy, RowAddress, SimRng, Tracker};
use crate::error::{invalid, violation, Result};

/// CAN is a 7-bit register.
const CAN_LIMIT: u32 = 127;

/// Register contents of a MINT tracker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MintState {
    /// Selected Activation Number; 0 is the transitive slot.
    pub san: u32,
    /// Current Activation Number.
    pub can: u32,
    /// Selected Address Register.
    pub sar: Option<RowAddress>,
    pub transitive_enabled: bool,
    pub pending_transitive_distance: u32,
}

/// Draws the next SAN uniformly from `0..=slots` (transitive) or `1..=slots`.
pub fn draw_san(rng: &mut SimRng, slots: u32, transitive: bool) -> u32 {
    let lo = if transitive { 0 } else { 1 };
    rng.gen_range(lo..=slots)
}

/// Minimalist In-DRAM Tracker: one pre-drawn slot per interval.
#[derive(Debug, Clone)]
pub struct Mint {
    slots: u32,
    overflow: OverflowPolicy,
    state: MintState,
}

impl Mint {
    /// `slots` is M (or the RFM window); the first SAN is drawn from `rng`.
    pub fn new(slots: u32, transitive: bool, rng: &mut SimRng) -> Result<Self> {
        let mut mint = Self::with_san(slots, transitive, 1)?;
        mint.state.san = draw_san(rng, slots, transitive);
        Ok(mint)
    }

    /// A tracker whose current interval uses a fixed SAN.
    pub fn with_san(slots: u32, transitive: bool, san: u32) -> Result<Self> {
        if slots == 0 || slots > CAN_LIMIT {
            return Err(invalid(format!("MINT slots must be in 1..={CAN_LIMIT}, got {slots}")));
        }
        let lo = if transitive { 0 } else { 1 };
        if san < lo || san > slots {
            return Err(invalid(format!("SAN {san} outside {lo}..={slots}")));
        }
        Ok(Self {
            slots,
            overflow: OverflowPolicy::Reject,
            state: MintState {
                san,
                can: 0,
                sar: None,
                transitive_enabled: transitive,
                pending_transitive_distance: 1,
            },
        })
    }

    pub fn with_overflow(mut self, overflow: OverflowPolicy) -> Self {
        self.overflow = overflow;
        self
    }

    pub fn state(&self) -> &MintState {
        &self.state
    }

    pub fn slots(&self) -> u32 {
        self.slots
    }
}

impl Tracker for Mint {
    fn name(&self) -> &'static str {
        "mint"
    }

    fn observe_activation(&mut self, row: RowAddress, _rng: &mut SimRng) -> Result<()> {
        let s = &mut self.state;
        if s.can >= self.slots {
            return match self.overflow {
                OverflowPolicy::Reject => Err(violation(format!(
                    "MINT observed more than {} activations in one interval",
                    self.slots
                ))),
                OverflowPolicy::Tolerate => Ok(()),
            };
        }
        s.can += 1;
        if s.can == s.san {
            s.sar = Some(row);
            s.pending_transitive_distance = 1;
        }
        Ok(())
    }

    fn on_refresh(&mut self, rng: &mut SimRng) -> MitigationDecision {
        let s = &mut self.state;
        let decision = s.sar.map(|row| Mitigation {
            row,
            distance: s.pending_transitive_distance,
        });
        let san = draw_san(rng, self.slots, s.transitive_enabled);
        if san == 0 && s.sar.is_some() {
            s.pending_transitive_distance += 1;
        } else {
            s.sar = None;
            s.pending_transitive_distance = 1;
        }
        s.san = san;
        s.can = 0;
        decision
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trackers::run_cycle;
    use crate::trackers::test_util::*;
    use rand::seq::SliceRandom;

    #[test]
    fn single_sided_is_always_selected() {
        let mut r = rng(11);
        let mut m = Mint::with_san(73, false, 5).unwrap();
        let acts = vec![row(100); 73];
        assert_eq!(run_cycle(&mut m, &acts, &mut r).unwrap(), Some(Mitigation::direct(row(100))));
        let mut m = Mint::new(73, false, &mut r).unwrap();
        for _ in 0..1000 {
            let d = run_cycle(&mut m, &acts, &mut r).unwrap();
            assert_eq!(d.map(|d| d.row), Some(row(100)));
        }
    }

    #[test]
    fn unused_slot_selects_nothing() {
        let mut r = rng(12);
        let mut m = Mint::with_san(73, false, 10).unwrap();
        let acts = rows(&[1, 2, 3, 4, 5, 6, 7, 8, 9]);
        assert_eq!(run_cycle(&mut m, &acts, &mut r).unwrap(), None);
    }

    #[test]
    fn san_state_after_refresh() {
        let mut r = rng(13);
        let mut m = Mint::with_san(73, false, 2).unwrap();
        m.observe_activation(row(1), &mut r).unwrap();
        m.observe_activation(row(2), &mut r).unwrap();
        assert_eq!(m.state().sar, Some(row(2)));
        assert_eq!(m.state().can, 2);
        m.on_refresh(&mut r);
        assert_eq!(m.state().can, 0);
        assert_eq!(m.state().sar, None);
        assert!((1..=73).contains(&m.state().san));
    }

    #[test]
    fn overflow_is_a_contract_violation() {
        let mut r = rng(14);
        let mut m = Mint::with_san(4, false, 1).unwrap();
        assert!(run_cycle(&mut m, &rows(&[1, 2, 3, 4, 5]), &mut r).is_err());
        let mut m = Mint::with_san(4, false, 1)
            .unwrap()
            .with_overflow(OverflowPolicy::Tolerate);
        assert_eq!(
            run_cycle(&mut m, &rows(&[1, 2, 3, 4, 5]), &mut r).unwrap(),
            Some(Mitigation::direct(row(1)))
        );
    }

    #[test]
    fn transitive_slot_preserves_and_deepens() {
        let mut r = rng(15);
        let mut m = Mint::new(2, true, &mut r).unwrap();
        let mut saw_distance_three = false;
        for _ in 0..20_000 {
            let d = run_cycle(&mut m, &rows(&[7, 7]), &mut r).unwrap();
            if m.state().san == 0 {
                // The next interval cannot capture, so the same row is kept.
                let kept = m.state().sar;
                let e = run_cycle(&mut m, &[], &mut r).unwrap();
                assert_eq!(e.map(|e| e.row), kept);
                if let (Some(d), Some(e)) = (d, e) {
                    assert_eq!(e.distance, d.distance + 1);
                    saw_distance_three |= e.distance >= 3;
                }
            }
        }
        assert!(saw_distance_three);
    }

    #[test]
    fn selection_frequency_is_uniform() {
        let mut r = rng(16);
        let mut m = Mint::new(73, false, &mut r).unwrap();
        let trials = 1_000_000u64;
        let mut hits = 0u64;
        let mut acts = Vec::with_capacity(73);
        for _ in 0..trials {
            let pos = r.gen_range(0..73);
            acts.clear();
            acts.extend((0..73).map(|i| if i == pos { row(1) } else { row(1000 + i) }));
            if run_cycle(&mut m, &acts, &mut r).unwrap().map(|d| d.row) == Some(row(1)) {
                hits += 1;
            }
        }
        assert!(within_3_sigma(hits, trials, 1.0 / 73.0), "hits {hits}");
    }

    #[test]
    fn count_proportional_and_position_independent() {
        let mut r = rng(17);
        for transitive in [false, true] {
            let slots = 8u32;
            let mut m = Mint::new(slots, transitive, &mut r).unwrap();
            let mut acts = rows(&[1, 1, 1, 2, 3, 4, 5, 6]);
            let trials = 200_000u64;
            let mut fresh = 0u64;
            for _ in 0..trials {
                acts.shuffle(&mut r);
                for &a in &acts {
                    m.observe_activation(a, &mut r).unwrap();
                }
                // Distance 1 marks a capture made during this interval.
                if m.state().sar == Some(row(1)) && m.state().pending_transitive_distance == 1 {
                    fresh += 1;
                }
                m.on_refresh(&mut r);
            }
            let denom = if transitive { 9.0 } else { 8.0 };
            assert!(within_3_sigma(fresh, trials, 3.0 / denom), "{transitive}: {fresh}");
        }
    }
}

use super::{ActivationSource, ATTACK_BASE_ROW, ROW_SPACING};
use crate::analytics::Sided;
use crate::dram::MAX_POSTPONE_LIMIT;
use crate::error::{invalid, Result};
use crate::trackers::RowAddress;

/// Morphing attack: pattern-2 until tREFI `mp`, then a burst of
/// (L+1)·M activations on the target exploiting maximum postponement.
///
/// The double-sided variant lays rows out in flanking pairs and bursts on the
/// pair around the first shared victim. A new cycle starts right after each
/// burst, so one cycle spans `mp + ceil(burst / M)` tREFI.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdaPattern {
    mp: u64,
    sided: Sided,
    max_act: u32,
    refi_per_window: u32,
    burst: u64,
    rows: Vec<RowAddress>,
}

impl AdaPattern {
    pub fn new(mp: u64, k: u32, sided: Sided, max_act: u32, refi_per_window: u32) -> Result<Self> {
        if mp == 0 || mp > refi_per_window as u64 {
            return Err(invalid(format!("morphing point {mp} outside 1..={refi_per_window}")));
        }
        if k == 0 || k > max_act || (sided == Sided::Double && k < 2) {
            return Err(invalid(format!("ADA needs 1 <= k <= {max_act} rows (two when double-sided), got {k}")));
        }
        let rows = (0..k)
            .map(|i| match sided {
                Sided::Single => RowAddress::new(ATTACK_BASE_ROW + ROW_SPACING * i),
                Sided::Double => RowAddress::new(ATTACK_BASE_ROW + ROW_SPACING * (i / 2) + 2 * (i % 2)),
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            mp,
            sided,
            max_act,
            refi_per_window,
            burst: (MAX_POSTPONE_LIMIT as u64 + 1) * max_act as u64,
            rows,
        })
    }

    pub fn rows(&self) -> &[RowAddress] {
        &self.rows
    }

    pub fn burst(&self) -> u64 {
        self.burst
    }

    /// tREFI per cycle: the pattern-2 phase plus the burst.
    pub fn cycle_len(&self) -> u64 {
        self.mp + self.burst.div_ceil(self.max_act as u64)
    }

    /// Target rows of the burst.
    pub fn targets(&self) -> &[RowAddress] {
        match self.sided {
            Sided::Single => &self.rows[..1],
            Sided::Double => &self.rows[..2],
        }
    }

    /// Whether tREFI `refi` falls inside a burst.
    pub fn in_burst(&self, refi: u64) -> bool {
        self.mp < self.refi_per_window as u64 && refi % self.cycle_len() >= self.mp
    }
}

impl ActivationSource for AdaPattern {
    fn fill_refi(&mut self, refi: u64, out: &mut Vec<RowAddress>) {
        if !self.in_burst(refi) {
            out.extend_from_slice(&self.rows);
            return;
        }
        let offset = (refi % self.cycle_len() - self.mp) * self.max_act as u64;
        let left = self.burst.saturating_sub(offset).min(self.max_act as u64);
        let targets = self.targets();
        out.extend((0..left).map(|s| targets[(s % targets.len() as u64) as usize]));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(p: &mut AdaPattern, n: u64) -> Vec<Vec<RowAddress>> {
        (0..n)
            .map(|refi| {
                let mut v = Vec::new();
                p.fill_refi(refi, &mut v);
                v
            })
            .collect()
    }

    #[test]
    fn no_morph_is_pattern2() {
        let mut p = AdaPattern::new(8192, 73, Sided::Single, 73, 8192).unwrap();
        assert!(window(&mut p, 8192).iter().all(|v| v.len() == 73));
        assert!((0..8192).all(|r| !p.in_burst(r)));
    }

    #[test]
    fn burst_is_365_on_target() {
        let mut p = AdaPattern::new(100, 73, Sided::Single, 73, 8192).unwrap();
        assert_eq!(p.cycle_len(), 105);
        let w = window(&mut p, 105);
        let burst: Vec<_> = w[100..].iter().flatten().collect();
        assert_eq!(burst.len(), 365);
        assert!(burst.iter().all(|&&r| r == p.targets()[0]));
        assert_eq!(w[105 - 1].len(), 73);
    }

    #[test]
    fn double_sided_burst_alternates() {
        let mut p = AdaPattern::new(10, 8, Sided::Double, 8, 100).unwrap();
        let t = p.targets().to_vec();
        assert_eq!(t[1].value() - t[0].value(), 2);
        let w = window(&mut p, 15);
        let burst: Vec<_> = w[10..].iter().flatten().copied().collect();
        assert_eq!(burst.len(), 40);
        assert_eq!(burst.iter().filter(|&&r| r == t[0]).count(), 20);
    }

    #[test]
    fn morph_point_checked() {
        assert!(AdaPattern::new(0, 73, Sided::Single, 73, 8192).is_err());
        assert!(AdaPattern::new(8193, 73, Sided::Single, 73, 8192).is_err());
        assert!(AdaPattern::new(5, 1, Sided::Double, 73, 8192).is_err());
    }
}

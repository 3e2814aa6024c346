//! Activation patterns used against the trackers.
//!
//! Static patterns are pure functions of (tREFI, slot). Adaptive adversaries
//! keep state, but only ever learn from their own activations and the REF
//! timing.

mod ada;
mod feinting;

use std::fmt;

use crate::error::{invalid, Result};
use crate::trackers::{MitigationDecision, RowAddress};

pub use ada::AdaPattern;
pub use feinting::FeintingAdversary;

/// First attack row; later rows are spaced [`ROW_SPACING`] apart.
pub const ATTACK_BASE_ROW: u32 = 1024;
pub const ROW_SPACING: u32 = 8;
/// Decoy rows live far away from every attack and victim row.
pub const DECOY_BASE_ROW: u32 = 200_000;

/// Anything that supplies activations one tREFI at a time.
pub trait ActivationSource: Send {
    /// Appends the activations of tREFI `refi` (0-based in the window) to `out`.
    fn fill_refi(&mut self, refi: u64, out: &mut Vec<RowAddress>);

    /// Called after every REF with its decision. Static patterns ignore it.
    fn observe_refresh(&mut self, _decision: &MitigationDecision) {}

    /// Restarts the source at the beginning of a refresh window.
    fn reset(&mut self) {}
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternKind {
    /// One row on every slot.
    SingleSided,
    /// Two rows flanking one victim, alternating across every slot.
    DoubleSided,
    /// One activation of a single row per tREFI.
    Pattern1,
    /// One activation to each of `k` rows per tREFI; round-robin when k > M.
    Pattern2 { k: u32 },
    /// `c` activations to each of `k` rows per tREFI.
    Pattern3 { k: u32, c: u32 },
    /// Continuous activations of Row-C, aiming at Row-A/Row-E through the
    /// victim refreshes of Row-B/Row-D.
    Transitive,
    /// M decoy ACTs opening each postponed batch, then `limit`·M attack ACTs.
    PostponementDecoy { limit: u32 },
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternKind::SingleSided => write!(f, "single"),
            PatternKind::DoubleSided => write!(f, "double"),
            PatternKind::Pattern1 => write!(f, "p1"),
            PatternKind::Pattern2 { k } => write!(f, "p2(k={k})"),
            PatternKind::Pattern3 { k, c } => write!(f, "p3(k={k};c={c})"),
            PatternKind::Transitive => write!(f, "transitive"),
            PatternKind::PostponementDecoy { limit } => write!(f, "decoy(limit={limit})"),
        }
    }
}

/// Row `i` of the attack row set.
pub fn attack_row(i: u32) -> Result<RowAddress> {
    RowAddress::new(ATTACK_BASE_ROW + ROW_SPACING * i)
}

/// Rows within `blast_radius` of `aggressor` on either side.
pub fn victims_of(aggressor: RowAddress, blast_radius: u32) -> Vec<RowAddress> {
    let br = blast_radius as i64;
    (-br..=br)
        .filter(|&d| d != 0)
        .filter_map(|d| aggressor.offset(d))
        .collect()
}

/// A deterministic per-tREFI slot assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackPattern {
    kind: PatternKind,
    max_act: u32,
    refi_per_window: u32,
    rows: Vec<RowAddress>,
    decoys: Vec<RowAddress>,
}

impl AttackPattern {
    pub fn gen_static(kind: PatternKind, max_act: u32, refi_per_window: u32) -> Result<Self> {
        if max_act == 0 || refi_per_window == 0 {
            return Err(invalid("patterns need M >= 1 and N >= 1"));
        }
        let n_rows = match kind {
            PatternKind::SingleSided | PatternKind::Pattern1 | PatternKind::PostponementDecoy { .. } => 1,
            PatternKind::DoubleSided => 2,
            PatternKind::Transitive => 1,
            PatternKind::Pattern2 { k } => {
                if k == 0 {
                    return Err(invalid("pattern-2 needs k >= 1"));
                }
                k
            }
            PatternKind::Pattern3 { k, c } => {
                if k == 0 || c == 0 || k as u64 * c as u64 > max_act as u64 {
                    return Err(invalid(format!("pattern-3 needs 1 <= k*c <= {max_act}, got k={k}, c={c}")));
                }
                k
            }
        };
        if let PatternKind::PostponementDecoy { limit } = kind {
            if limit == 0 || limit > crate::dram::MAX_POSTPONE_LIMIT {
                return Err(invalid(format!("decoy pattern needs a postpone limit in 1..=4, got {limit}")));
            }
        }
        let rows = if kind == PatternKind::DoubleSided {
            vec![RowAddress::new(ATTACK_BASE_ROW)?, RowAddress::new(ATTACK_BASE_ROW + 2)?]
        } else {
            (0..n_rows).map(attack_row).collect::<Result<_>>()?
        };
        let decoys = match kind {
            PatternKind::PostponementDecoy { .. } => (0..max_act)
                .map(|i| RowAddress::new(DECOY_BASE_ROW + ROW_SPACING * i))
                .collect::<Result<_>>()?,
            _ => Vec::new(),
        };
        Ok(Self {
            kind,
            max_act,
            refi_per_window,
            rows,
            decoys,
        })
    }

    pub fn kind(&self) -> PatternKind {
        self.kind
    }

    pub fn max_act(&self) -> u32 {
        self.max_act
    }

    pub fn refi_per_window(&self) -> u32 {
        self.refi_per_window
    }

    /// The aggressor rows, in slot order of first use.
    pub fn rows(&self) -> &[RowAddress] {
        &self.rows
    }

    pub fn decoys(&self) -> &[RowAddress] {
        &self.decoys
    }

    /// Row activated at slot `s` (0-based) of tREFI `refi`, if any.
    pub fn slot(&self, refi: u64, s: u32) -> Option<RowAddress> {
        if s >= self.max_act {
            return None;
        }
        match self.kind {
            PatternKind::SingleSided | PatternKind::Transitive => Some(self.rows[0]),
            PatternKind::DoubleSided => Some(self.rows[(s % 2) as usize]),
            PatternKind::Pattern1 => (s == 0).then_some(self.rows[0]),
            PatternKind::Pattern2 { k } => {
                if k <= self.max_act {
                    (s < k).then(|| self.rows[s as usize])
                } else {
                    let idx = (refi * self.max_act as u64 + s as u64) % k as u64;
                    Some(self.rows[idx as usize])
                }
            }
            PatternKind::Pattern3 { k, c } => (s < k * c).then(|| self.rows[(s / c) as usize]),
            PatternKind::PostponementDecoy { limit } => {
                if refi.is_multiple_of(limit as u64 + 1) {
                    Some(self.decoys[s as usize])
                } else {
                    Some(self.rows[0])
                }
            }
        }
    }

    /// Victims of the aggressor rows, one list per row.
    pub fn victims(&self, blast_radius: u32) -> Vec<(RowAddress, Vec<RowAddress>)> {
        self.rows.iter().map(|&r| (r, victims_of(r, blast_radius))).collect()
    }

    /// Activations per window of each aggressor row.
    pub fn window_counts(&self) -> Vec<(RowAddress, u64)> {
        let mut counts = std::collections::BTreeMap::new();
        for refi in 0..self.refi_per_window as u64 {
            for s in 0..self.max_act {
                if let Some(r) = self.slot(refi, s) {
                    *counts.entry(r).or_insert(0u64) += 1;
                }
            }
        }
        self.rows.iter().map(|r| (*r, counts.get(r).copied().unwrap_or(0))).collect()
    }
}

impl ActivationSource for AttackPattern {
    fn fill_refi(&mut self, refi: u64, out: &mut Vec<RowAddress>) {
        out.extend((0..self.max_act).filter_map(|s| self.slot(refi, s)));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn acts(p: &mut AttackPattern, refi: u64) -> Vec<RowAddress> {
        let mut v = Vec::new();
        p.fill_refi(refi, &mut v);
        v
    }

    #[test]
    fn pattern1_repeats_every_refi() {
        let p = AttackPattern::gen_static(PatternKind::Pattern1, 73, 8192).unwrap();
        assert_eq!(p.window_counts(), vec![(attack_row(0).unwrap(), 8192)]);
    }

    #[test]
    fn pattern3_full_copies_equals_single_sided() {
        let mut a = AttackPattern::gen_static(PatternKind::Pattern3 { k: 1, c: 73 }, 73, 16).unwrap();
        let mut b = AttackPattern::gen_static(PatternKind::SingleSided, 73, 16).unwrap();
        for refi in 0..16 {
            assert_eq!(acts(&mut a, refi), acts(&mut b, refi));
        }
    }

    #[test]
    fn decoy_pattern_layout() {
        let mut p = AttackPattern::gen_static(PatternKind::PostponementDecoy { limit: 4 }, 73, 8192).unwrap();
        let first = acts(&mut p, 0);
        assert_eq!(first.len(), 73);
        assert!(first.iter().all(|r| r.value() >= DECOY_BASE_ROW));
        for refi in 1..5 {
            assert!(acts(&mut p, refi).iter().all(|&r| r == p.rows()[0]));
        }
        let attack: u64 = p.window_counts()[0].1;
        let full_batches = 8192 / 5;
        assert_eq!(full_batches * 292, 478_296);
        assert!(attack >= full_batches * 292);
    }

    #[test]
    fn double_sided_shares_one_victim() {
        let p = AttackPattern::gen_static(PatternKind::DoubleSided, 73, 4).unwrap();
        let v = p.victims(1);
        let shared: Vec<_> = v[0].1.iter().filter(|r| v[1].1.contains(r)).collect();
        assert_eq!(shared.len(), 1);
        assert_eq!(shared[0].value(), ATTACK_BASE_ROW + 1);
    }

    #[test]
    fn parameter_errors() {
        assert!(AttackPattern::gen_static(PatternKind::Pattern2 { k: 0 }, 73, 8192).is_err());
        assert!(AttackPattern::gen_static(PatternKind::Pattern3 { k: 10, c: 8 }, 73, 8192).is_err());
        assert!(AttackPattern::gen_static(PatternKind::PostponementDecoy { limit: 5 }, 73, 8192).is_err());
        assert!(AttackPattern::gen_static(PatternKind::Pattern1, 0, 8192).is_err());
    }

    proptest! {
        #[test]
        fn slot_budget_respected(k in 1u32..200, c in 1u32..8, m in 8u32..80, refi in 0u64..10_000) {
            for kind in [PatternKind::Pattern2 { k }, PatternKind::Pattern3 { k: (m / c).max(1), c: c.min(m) }] {
                let mut p = AttackPattern::gen_static(kind, m, 64).unwrap();
                prop_assert!(acts(&mut p, refi).len() <= m as usize);
            }
        }

        #[test]
        fn pattern2_counts_are_balanced(k in 1u32..300, m in 4u32..80, n in 1u32..200) {
            let p = AttackPattern::gen_static(PatternKind::Pattern2 { k }, m, n).unwrap();
            let counts = p.window_counts();
            if k <= m {
                prop_assert!(counts.iter().all(|&(_, c)| c == n as u64));
            } else {
                let fair = n as u64 * m as u64 / k as u64;
                prop_assert!(counts.iter().all(|&(_, c)| c + 1 >= fair && c <= fair + 1));
            }
        }
    }
}

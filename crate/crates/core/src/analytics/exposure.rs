use super::closed_form::nonselection_probability;
use crate::dram::DerivedParams;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitiveTracker {
    Mint { transitive: bool },
    Parfm,
    Para,
    Prct,
    MisraGries,
}

/// Victim-of-victim disturbances a single-sided attack on Row-C can cause per
/// window through the tracker's own victim refreshes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitiveExposure {
    /// The tracker sees victim refreshes or mitigates distance-2 rows itself.
    Immune,
    /// Expected (or guaranteed) victim refreshes of Row-B/Row-D per window.
    Exposed { disturbances: u64 },
}

impl TransitiveExposure {
    /// Threshold a transitive victim must tolerate (single-sided units).
    pub fn min_trh(&self) -> Option<u64> {
        match self {
            TransitiveExposure::Immune => None,
            TransitiveExposure::Exposed { disturbances } => Some(*disturbances),
        }
    }

    pub fn min_trh_d(&self) -> Option<u64> {
        self.min_trh().map(|t| t.div_ceil(2))
    }

    /// Whether the transitive path is worse than the direct threshold.
    pub fn dominates(&self, direct_min_trh: u64) -> bool {
        self.min_trh().is_some_and(|t| t > direct_min_trh)
    }
}

pub fn transitive_exposure(tracker: TransitiveTracker, derived: &DerivedParams) -> TransitiveExposure {
    let n = derived.refi_per_window as u64;
    match tracker {
        TransitiveTracker::Mint { transitive: false } | TransitiveTracker::Parfm => {
            TransitiveExposure::Exposed { disturbances: n }
        }
        TransitiveTracker::Para => {
            let m = derived.max_act as u64;
            let miss = nonselection_probability(1.0 / m as f64, m).expect("1/M is a probability");
            TransitiveExposure::Exposed {
                disturbances: (n as f64 * (1.0 - miss)).round() as u64,
            }
        }
        TransitiveTracker::Mint { transitive: true }
        | TransitiveTracker::Prct
        | TransitiveTracker::MisraGries => TransitiveExposure::Immune,
    }
}

/// State of the feinting game when two rows remain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeintingOutcome {
    /// Highest count among the final two rows.
    pub peak: u64,
    /// Counts of the final two rows, larger first.
    pub final_pair: (u64, u64),
}

impl FeintingOutcome {
    /// Hammers on a victim flanked by the final two rows.
    pub fn victim_hammers(&self) -> u64 {
        self.final_pair.0 + self.final_pair.1
    }
}

/// Integer water-filling against a max-count tracker.
///
/// Each round the attacker spreads `m` ACTs over the surviving rows, always
/// topping up the lowest counts, and the tracker then removes one row with the
/// highest count. Counts stay within one of each other, so the pool is kept as
/// `lo` rows at `level` and `hi` rows at `level + 1`.
pub fn feinting_limit(m: u64, n: u64) -> Result<FeintingOutcome> {
    if n < 2 || m == 0 {
        return Err(invalid(format!("feinting needs N >= 2 rows and M >= 1, got N={n}, M={m}")));
    }
    let (mut level, mut lo, mut hi) = (0u64, n, 0u64);
    for round in 0..n - 1 {
        let rows = lo + hi;
        if m >= lo {
            let rest = m - lo;
            level += 1 + rest / rows;
            hi = rest % rows;
            lo = rows - hi;
        } else {
            lo -= m;
            hi += m;
        }
        if round == n - 2 {
            let pair = match hi {
                0 => (level, level),
                1 => (level + 1, level),
                _ => (level + 1, level + 1),
            };
            return Ok(FeintingOutcome {
                peak: pair.0,
                final_pair: pair,
            });
        }
        if hi > 0 {
            hi -= 1;
        } else {
            lo -= 1;
        }
    }
    unreachable!("loop returns on its last round")
}

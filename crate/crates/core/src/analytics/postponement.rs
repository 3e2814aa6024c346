use super::threshold::ThresholdResult;
use crate::dram::DerivedParams;

/// How much extra exposure a DMQ-delayed mitigation allows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternClass {
    /// The selected row may be hammered continuously while queued: +L·M.
    Generic,
    /// The worst pattern activates each row once per tREFI: +L per side.
    SingleActPerRefi,
}

/// Threshold with a DMQ under `limit` postponed REFs.
pub fn dmq_adjust(base: &ThresholdResult, class: PatternClass, max_act: u32, limit: u32) -> ThresholdResult {
    let (delta, tag) = match class {
        PatternClass::Generic => (limit as u64 * max_act as u64, "generic"),
        PatternClass::SingleActPerRefi => (2 * limit as u64, "single-act"),
    };
    base.shifted(delta, format!("{}+dmq({tag})", base.pattern))
}

/// ACTs a decoy-then-hammer pattern lands on one row per window when a
/// slot-based tracker sees only the first M ACTs between REF batches.
pub fn undetected_activations(derived: &DerivedParams, limit: u32) -> u64 {
    let batch = limit as u64 + 1;
    (derived.refi_per_window as u64 / batch) * limit as u64 * derived.max_act as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjustments() {
        let prct = ThresholdResult::deterministic(1245, "feinting");
        assert_eq!(dmq_adjust(&prct, PatternClass::Generic, 73, 4).min_trh_d, 769);
        let parfm = ThresholdResult::deterministic(8192, "transitive");
        assert_eq!(dmq_adjust(&parfm, PatternClass::Generic, 73, 4).min_trh_d, 4242);
        let mint = ThresholdResult::deterministic(2800, "p2");
        assert_eq!(dmq_adjust(&mint, PatternClass::SingleActPerRefi, 73, 4).min_trh_d, 1404);
    }

    #[test]
    fn decoy_exposure() {
        assert_eq!(undetected_activations(&DerivedParams::ddr5(), 4), 478_296);
        assert_eq!(undetected_activations(&DerivedParams::ddr5(), 0), 0);
    }
}

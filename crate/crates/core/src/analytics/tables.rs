//! The tracker comparison, postponement, RFM and Target-TTF tables.

use std::fmt;

use super::ada::{AdaEvaluator, AdaModel, Sided};
use super::exposure::{feinting_limit, transitive_exposure, TransitiveExposure, TransitiveTracker};
use super::model::{PatternModel, SecurityModel, TrackerModel};
use super::postponement::{dmq_adjust, undetected_activations, PatternClass};
use super::rfm::{rfm_min_trh, MitigationRate, RfmOptions};
use super::threshold::{Mttf, TargetMttf, ThresholdResult, CONCURRENT_BANKS};
use crate::dram::{DerivedParams, MAX_POSTPONE_LIMIT};
use crate::error::Result;

/// Literature value for a 677-entry Mithril tracker.
pub const MITHRIL_MIN_TRH_D: u64 = 1400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HeadlineTracker {
    Prct,
    Mithril,
    Parfm,
    Para,
    Mint,
}

impl HeadlineTracker {
    pub const ALL: [HeadlineTracker; 5] = [
        HeadlineTracker::Prct,
        HeadlineTracker::Mithril,
        HeadlineTracker::Parfm,
        HeadlineTracker::Para,
        HeadlineTracker::Mint,
    ];

    pub fn label(self) -> &'static str {
        match self {
            HeadlineTracker::Prct => "prct",
            HeadlineTracker::Mithril => "mithril",
            HeadlineTracker::Parfm => "parfm",
            HeadlineTracker::Para => "para",
            HeadlineTracker::Mint => "mint",
        }
    }
}

impl fmt::Display for HeadlineTracker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Worst-case MinTRH of a tracker over every attack it is exposed to.
pub fn tracker_headline(tracker: HeadlineTracker, derived: &DerivedParams, target: TargetMttf) -> Result<ThresholdResult> {
    let m = derived.max_act as u64;
    let n = derived.refi_per_window as u64;
    match tracker {
        HeadlineTracker::Prct => {
            let f = feinting_limit(m, n)?;
            Ok(ThresholdResult::deterministic(f.victim_hammers(), "feinting"))
        }
        HeadlineTracker::Mithril => Ok(ThresholdResult::deterministic(2 * MITHRIL_MIN_TRH_D, "literature")),
        HeadlineTracker::Parfm => {
            let direct = SecurityModel::new(TrackerModel::Parfm, PatternModel::Pattern2 { k: m }, *derived).min_trh(target)?;
            let exposure = transitive_exposure(TransitiveTracker::Parfm, derived);
            Ok(worse_of_transitive(direct, exposure))
        }
        HeadlineTracker::Para => {
            SecurityModel::new(TrackerModel::para(derived.max_act), PatternModel::ParaWorstPosition, *derived).min_trh(target)
        }
        HeadlineTracker::Mint => SecurityModel::new(
            TrackerModel::Mint { transitive: true },
            PatternModel::Pattern2 { k: m },
            *derived,
        )
        .min_trh(target),
    }
}

fn worse_of_transitive(direct: ThresholdResult, exposure: TransitiveExposure) -> ThresholdResult {
    match exposure.min_trh() {
        Some(t) if t > direct.min_trh => ThresholdResult::deterministic(t, "transitive"),
        _ => direct,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub tracker: HeadlineTracker,
    pub result: ThresholdResult,
    pub transitive_immune: bool,
}

pub fn comparison_table(derived: &DerivedParams, target: TargetMttf) -> Result<Vec<ComparisonRow>> {
    HeadlineTracker::ALL
        .iter()
        .map(|&tracker| {
            let exposure = match tracker {
                HeadlineTracker::Prct => TransitiveTracker::Prct,
                HeadlineTracker::Mithril => TransitiveTracker::MisraGries,
                HeadlineTracker::Parfm => TransitiveTracker::Parfm,
                HeadlineTracker::Para => TransitiveTracker::Para,
                HeadlineTracker::Mint => TransitiveTracker::Mint { transitive: true },
            };
            let result = tracker_headline(tracker, derived, target)?;
            let transitive_immune = transitive_exposure(exposure, derived)
                .min_trh()
                .is_none_or(|t| t < result.min_trh);
            Ok(ComparisonRow {
                tracker,
                result,
                transitive_immune,
            })
        })
        .collect()
}

/// A postponement table cell: a MinTRH, or an activation count the attacker
/// lands without the tracker ever seeing it at a selectable slot.
#[derive(Debug, Clone, PartialEq)]
pub enum PostponementCell {
    Threshold(ThresholdResult),
    Undetected { activations: u64 },
}

impl PostponementCell {
    /// The value reported in the MinTRH-D column.
    pub fn min_trh_d(&self) -> u64 {
        match self {
            PostponementCell::Threshold(r) => r.min_trh_d,
            PostponementCell::Undetected { activations } => *activations,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PostponementRow {
    pub tracker: HeadlineTracker,
    pub timely: ThresholdResult,
    pub postponed: PostponementCell,
    pub with_dmq: ThresholdResult,
    /// Double-sided ADA result, for trackers whose DMQ bound ADA can exploit.
    pub with_dmq_ada: Option<ThresholdResult>,
}

/// MinTRH of InDRAM-PARA when each sampling interval spans `window` ACTs.
pub fn para_window_min_trh(derived: &DerivedParams, window: u64, target: TargetMttf) -> Result<ThresholdResult> {
    let tracker = TrackerModel::Para {
        p_num: 1,
        p_den: derived.max_act as u64,
        window,
    };
    SecurityModel::new(tracker, PatternModel::ParaWorstPosition, *derived).min_trh(target)
}

pub fn postponement_table(derived: &DerivedParams, target: TargetMttf) -> Result<Vec<PostponementRow>> {
    let limit = MAX_POSTPONE_LIMIT;
    let m = derived.max_act;
    let decoy = undetected_activations(derived, limit);
    HeadlineTracker::ALL
        .iter()
        .map(|&tracker| {
            let timely = tracker_headline(tracker, derived, target)?;
            let generic = dmq_adjust(&timely, PatternClass::Generic, m, limit);
            let row = match tracker {
                HeadlineTracker::Prct | HeadlineTracker::Mithril => PostponementRow {
                    tracker,
                    postponed: PostponementCell::Threshold(generic.clone()),
                    with_dmq: generic,
                    with_dmq_ada: None,
                    timely,
                },
                HeadlineTracker::Parfm => PostponementRow {
                    tracker,
                    postponed: PostponementCell::Undetected { activations: decoy },
                    with_dmq: generic,
                    with_dmq_ada: None,
                    timely,
                },
                HeadlineTracker::Para => {
                    let window = (limit as u64 + 1) * m as u64;
                    PostponementRow {
                        tracker,
                        postponed: PostponementCell::Threshold(para_window_min_trh(derived, window, target)?),
                        with_dmq: dmq_adjust(&timely, PatternClass::SingleActPerRefi, m, limit),
                        with_dmq_ada: None,
                        timely,
                    }
                }
                HeadlineTracker::Mint => {
                    let ada = AdaEvaluator::new(AdaModel::mint(derived, Sided::Double), target)?.peak()?;
                    PostponementRow {
                        tracker,
                        postponed: PostponementCell::Undetected { activations: decoy },
                        with_dmq: dmq_adjust(&timely, PatternClass::SingleActPerRefi, m, limit),
                        with_dmq_ada: Some(ada.result),
                        timely,
                    }
                }
            };
            Ok(row)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RfmRow {
    pub rate: MitigationRate,
    pub result: ThresholdResult,
}

pub const RFM_TABLE_RATES: [MitigationRate; 4] = [
    MitigationRate::Half,
    MitigationRate::One,
    MitigationRate::Rfm { rfm_th: 32 },
    MitigationRate::Rfm { rfm_th: 16 },
];

pub fn rfm_table(derived: &DerivedParams, target: TargetMttf, opts: RfmOptions) -> Result<Vec<RfmRow>> {
    RFM_TABLE_RATES
        .iter()
        .map(|&rate| {
            Ok(RfmRow {
                rate,
                result: rfm_min_trh(rate, derived, target, opts)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetTtfRow {
    pub target: TargetMttf,
    pub system_years: f64,
    pub mint: ThresholdResult,
    pub rfm32: ThresholdResult,
    pub rfm16: ThresholdResult,
}

pub const TARGET_TTF_YEARS: [f64; 4] = [1e3, 1e4, 1e5, 1e6];

pub fn target_ttf_table(derived: &DerivedParams, targets: &[f64]) -> Result<Vec<TargetTtfRow>> {
    let o = RfmOptions::default();
    targets
        .iter()
        .map(|&years| {
            let target = TargetMttf(years).validate()?;
            let bank = Mttf::Finite {
                seconds: years * super::threshold::SECONDS_PER_YEAR,
            };
            Ok(TargetTtfRow {
                target,
                system_years: bank.system(CONCURRENT_BANKS).years(),
                mint: rfm_min_trh(MitigationRate::One, derived, target, o)?,
                rfm32: rfm_min_trh(MitigationRate::Rfm { rfm_th: 32 }, derived, target, o)?,
                rfm16: rfm_min_trh(MitigationRate::Rfm { rfm_th: 16 }, derived, target, o)?,
            })
        })
        .collect()
}

//! Closed-form probabilities, the failure recurrence and MinTRH searches.

mod ada;
mod closed_form;
mod exposure;
mod markov;
mod model;
mod postponement;
mod recurrence;
mod rfm;
mod sweep;
mod tables;
mod threshold;

pub use ada::{ada_min_trh, AdaEvaluator, AdaModel, AdaPoint, Sided};
pub use closed_form::{nonselection_probability, nooverwrite_sampling, para_effective_p, survival_probability};
pub use exposure::{feinting_limit, transitive_exposure, FeintingOutcome, TransitiveExposure, TransitiveTracker};
pub use markov::{count_tail, markov_distribution, MarkovCountDistribution};
pub use model::{PatternModel, RowModel, RowProbability, SecurityModel, TrackerModel};
pub use postponement::{dmq_adjust, undetected_activations, PatternClass};
pub use recurrence::{failure_curve, failure_probability, FailureCurve, MAX_CURVE_LEN};
pub use rfm::{rate_model, rfm_min_trh, MitigationRate, RfmOptions};
pub use sweep::{pattern_sweep, pattern_sweep_serial, SweepContext, SweepPoint, SweepVariable};
pub use tables::{
    comparison_table, para_window_min_trh, postponement_table, rfm_table, target_ttf_table, tracker_headline,
    ComparisonRow, HeadlineTracker, PostponementCell, PostponementRow, RfmRow, TargetTtfRow, MITHRIL_MIN_TRH_D,
    RFM_TABLE_RATES, TARGET_TTF_YEARS,
};
pub use threshold::{
    mttf, search_min_trh, Mttf, TargetMttf, ThresholdResult, CONCURRENT_BANKS, DEFAULT_TARGET_BANK_YEARS,
    SECONDS_PER_YEAR,
};

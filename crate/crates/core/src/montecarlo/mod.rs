//! Seeded discrete-event simulation of one bank under attack.
//!
//! A trial runs a tracker against an activation source for a number of
//! refresh windows and reports the first row whose disturbance count since
//! its last refresh reaches the threshold T.

mod estimate;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rustc_hash::FxHashMap;

use crate::analytics::Sided;
use crate::attacks::{ActivationSource, AdaPattern, AttackPattern, FeintingAdversary, PatternKind};
use crate::dram::RefreshSchedule;
use crate::error::{invalid, Error, Result};
use crate::trackers::{Mitigation, OverflowPolicy, RowAddress, SimRng, Tracker, TrackerSpec};

pub use estimate::{
    analytic_p_fail, estimate_p_refw, estimate_p_refw_serial, run_trials, trial_seed, Estimate, TrialOutcome,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternSpec {
    Static(PatternKind),
    /// Water-filling over a pool of rows.
    Feinting { pool: u32 },
    Ada { mp: u64, k: u32, sided: Sided },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleSpec {
    Timely,
    MaxPostponed { limit: u32 },
    /// A fresh random batch layout every window.
    Randomized { limit: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialConfig {
    pub tracker: TrackerSpec,
    pub pattern: PatternSpec,
    pub schedule: ScheduleSpec,
    pub trh: u64,
    pub seed: u64,
    pub windows: u32,
    pub blast_radius: u32,
    /// Activation slots per tREFI (M).
    pub max_act: u32,
    pub refi_per_window: u32,
    pub overflow: OverflowPolicy,
    /// Whether victim refreshes are reported to the tracker. Only counter-based
    /// trackers react to them.
    pub observe_victim_refreshes: bool,
    /// Whether a victim refresh disturbs the refreshed row's own neighbours.
    pub transitive_disturbance: bool,
    pub record_log: bool,
}

impl TrialConfig {
    pub fn new(tracker: TrackerSpec, pattern: PatternSpec, trh: u64, max_act: u32, refi_per_window: u32) -> Self {
        Self {
            tracker,
            pattern,
            schedule: ScheduleSpec::Timely,
            trh,
            seed: 0,
            windows: 1,
            blast_radius: 1,
            max_act,
            refi_per_window,
            overflow: OverflowPolicy::Reject,
            observe_victim_refreshes: true,
            transitive_disturbance: true,
            record_log: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trh == 0 || self.windows == 0 {
            return Err(invalid("a trial needs T >= 1 and at least one window"));
        }
        if self.blast_radius == 0 || self.max_act == 0 || self.refi_per_window == 0 {
            return Err(invalid("blast radius, MaxACT and window length must be positive"));
        }
        Ok(())
    }

    fn source(&self) -> Result<Box<dyn ActivationSource>> {
        Ok(match self.pattern {
            PatternSpec::Static(kind) => Box::new(AttackPattern::gen_static(kind, self.max_act, self.refi_per_window)?),
            PatternSpec::Feinting { pool } => Box::new(FeintingAdversary::new(self.max_act, pool)?),
            PatternSpec::Ada { mp, k, sided } => {
                Box::new(AdaPattern::new(mp, k, sided, self.max_act, self.refi_per_window)?)
            }
        })
    }

    fn schedule(&self, rng: &mut SimRng) -> Result<RefreshSchedule> {
        match self.schedule {
            ScheduleSpec::Timely => Ok(RefreshSchedule::timely(self.refi_per_window)),
            ScheduleSpec::MaxPostponed { limit } => RefreshSchedule::max_postponed(limit, self.refi_per_window),
            ScheduleSpec::Randomized { limit } => RefreshSchedule::randomized(limit, self.refi_per_window, rng),
        }
    }
}

/// When and where a mitigation happened.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MitigationRecord {
    /// tREFI index counted from the start of the trial.
    pub refi: u64,
    pub mitigation: Mitigation,
    pub via_rfm: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FailureReport {
    pub failed: bool,
    pub failing_row: Option<RowAddress>,
    pub failing_refi: Option<u64>,
    /// Highest disturbance count any row reached.
    pub max_disturbance: u64,
    pub max_disturbance_row: Option<RowAddress>,
    pub mitigations: u64,
    pub ref_epochs: u64,
    pub rfm_epochs: u64,
    /// Victim refreshes per row; filled only when logging is on.
    pub refresh_counts: BTreeMap<RowAddress, u64>,
    pub log: Vec<MitigationRecord>,
}

impl FailureReport {
    pub fn log_len(&self) -> usize {
        self.log.len()
    }
}

struct Bank<'a> {
    cfg: &'a TrialConfig,
    tracker: Box<dyn Tracker>,
    disturb: FxHashMap<RowAddress, u64>,
    report: FailureReport,
    refi: u64,
}

impl Bank<'_> {
    fn disturb(&mut self, row: RowAddress) {
        let c = self.disturb.entry(row).or_insert(0);
        *c += 1;
        let c = *c;
        if c > self.report.max_disturbance {
            self.report.max_disturbance = c;
            self.report.max_disturbance_row = Some(row);
        }
        if c >= self.cfg.trh && !self.report.failed {
            self.report.failed = true;
            self.report.failing_row = Some(row);
            self.report.failing_refi = Some(self.refi);
        }
    }

    fn activate(&mut self, row: RowAddress) {
        self.disturb.remove(&row);
        let br = self.cfg.blast_radius as i64;
        for d in 1..=br {
            for v in [row.offset(-d), row.offset(d)].into_iter().flatten() {
                self.disturb(v);
            }
        }
    }

    fn mitigate(&mut self, m: Mitigation, via_rfm: bool) {
        self.report.mitigations += 1;
        if self.cfg.record_log {
            self.report.log.push(MitigationRecord {
                refi: self.refi,
                mitigation: m,
                via_rfm,
            });
        }
        let br = self.cfg.blast_radius as i64;
        let inner = (m.distance as i64 - 1) * br + 1;
        let outer = m.distance as i64 * br;
        for d in inner..=outer {
            for v in [m.row.offset(-d), m.row.offset(d)].into_iter().flatten() {
                self.disturb.remove(&v);
                if self.cfg.record_log {
                    *self.report.refresh_counts.entry(v).or_insert(0) += 1;
                }
                if self.cfg.transitive_disturbance {
                    self.activate(v);
                }
                if self.cfg.observe_victim_refreshes {
                    self.tracker.observe_victim_refresh(v);
                }
            }
        }
    }
}

/// Runs one trial, stopping at the first activation that brings a row to T.
/// Identical configs give identical reports.
pub fn run_trial(cfg: &TrialConfig) -> Result<FailureReport> {
    cfg.validate()?;
    let mut rng = SimRng::seed_from_u64(cfg.seed);
    let tracker = cfg.tracker.build(cfg.max_act, cfg.overflow, &mut rng)?;
    let mut source = cfg.source()?;
    let mut bank = Bank {
        cfg,
        tracker,
        disturb: FxHashMap::default(),
        report: FailureReport::default(),
        refi: 0,
    };
    let mut acts = Vec::with_capacity(cfg.max_act as usize);
    for _ in 0..cfg.windows {
        let refs = cfg.schedule(&mut rng)?.refs_per_refi();
        source.reset();
        for (r, &n_ref) in refs.iter().enumerate() {
            acts.clear();
            source.fill_refi(r as u64, &mut acts);
            for &row in &acts {
                bank.tracker.observe_activation(row, &mut rng).map_err(|e| match e {
                    Error::ContractViolation(msg) => Error::ScheduleMismatch(msg),
                    other => other,
                })?;
                bank.activate(row);
                if let Some(decision) = bank.tracker.poll_rfm(&mut rng) {
                    bank.report.rfm_epochs += 1;
                    if let Some(m) = decision {
                        bank.mitigate(m, true);
                    }
                }
                if bank.report.failed {
                    return Ok(bank.report);
                }
            }
            for _ in 0..n_ref {
                bank.report.ref_epochs += 1;
                let decision = bank.tracker.on_refresh(&mut rng);
                if let Some(m) = decision {
                    bank.mitigate(m, false);
                }
                source.observe_refresh(&decision);
            }
            if bank.report.failed {
                return Ok(bank.report);
            }
            bank.refi += 1;
        }
        bank.disturb.clear();
        bank.tracker.on_window_refresh();
    }
    Ok(bank.report)
}

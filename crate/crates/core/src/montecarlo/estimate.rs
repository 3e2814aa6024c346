use rayon::prelude::*;

use super::{run_trial, PatternSpec, ScheduleSpec, TrialConfig};
use crate::analytics::failure_probability;
use crate::attacks::PatternKind;
use crate::error::{invalid, Result};
use crate::trackers::{RowAddress, TrackerKind};

/// Fraction of failing trials with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub trials: u64,
    pub failures: u64,
    pub p: f64,
    pub stderr: f64,
}

impl Estimate {
    fn from_counts(trials: u64, failures: u64) -> Self {
        let p = failures as f64 / trials as f64;
        Self {
            trials,
            failures,
            p,
            stderr: (p * (1.0 - p) / trials as f64).sqrt(),
        }
    }

    /// |estimate - reference| in units of the reference's binomial sigma.
    pub fn z_score(&self, reference: f64) -> f64 {
        let sd = (reference * (1.0 - reference) / self.trials as f64).sqrt();
        if sd == 0.0 {
            return if self.p == reference { 0.0 } else { f64::INFINITY };
        }
        (self.p - reference).abs() / sd
    }

    pub fn within_sigmas(&self, reference: f64, sigmas: f64) -> bool {
        self.z_score(reference) <= sigmas
    }
}

/// The compact result of one trial of a batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub index: u64,
    pub seed: u64,
    pub failed: bool,
    pub failing_row: Option<RowAddress>,
    pub failing_refi: Option<u64>,
    pub max_disturbance: u64,
    pub mitigations: u64,
}

/// Seed of trial `i` of a batch.
pub fn trial_seed(master: u64, i: u64) -> u64 {
    master ^ i
}

fn trial(cfg: &TrialConfig, i: u64) -> Result<TrialOutcome> {
    let seed = trial_seed(cfg.seed, i);
    let r = run_trial(&TrialConfig {
        seed,
        record_log: false,
        ..*cfg
    })?;
    Ok(TrialOutcome {
        index: i,
        seed,
        failed: r.failed,
        failing_row: r.failing_row,
        failing_refi: r.failing_refi,
        max_disturbance: r.max_disturbance,
        mitigations: r.mitigations,
    })
}

fn trial_failed(cfg: &TrialConfig, i: u64) -> Result<bool> {
    Ok(trial(cfg, i)?.failed)
}

fn worker_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| invalid(format!("cannot start worker pool: {e}")))
}

/// Every trial's outcome, in trial order.
pub fn run_trials(cfg: &TrialConfig, trials: u64, jobs: usize) -> Result<Vec<TrialOutcome>> {
    cfg.validate()?;
    worker_pool(jobs)?.install(|| (0..trials).into_par_iter().map(|i| trial(cfg, i)).collect())
}

impl Estimate {
    pub fn from_outcomes(outcomes: &[TrialOutcome]) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(invalid("need at least one trial"));
        }
        let failures = outcomes.iter().filter(|o| o.failed).count() as u64;
        Ok(Self::from_counts(outcomes.len() as u64, failures))
    }
}

/// Runs `trials` independent trials on `jobs` worker threads.
///
/// Trial i uses seed `cfg.seed ^ i`, so the result does not depend on `jobs`.
pub fn estimate_p_refw(cfg: &TrialConfig, trials: u64, jobs: usize) -> Result<Estimate> {
    if trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    cfg.validate()?;
    let failures = worker_pool(jobs)?.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|i| trial_failed(cfg, i).map(u64::from))
            .try_reduce(|| 0, |a, b| Ok(a + b))
    })?;
    Ok(Estimate::from_counts(trials, failures))
}

pub fn estimate_p_refw_serial(cfg: &TrialConfig, trials: u64) -> Result<Estimate> {
    if trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    let mut failures = 0;
    for i in 0..trials {
        failures += trial_failed(cfg, i)? as u64;
    }
    Ok(Estimate::from_counts(trials, failures))
}

/// Recurrence prediction of a trial's failure probability, for the configs
/// the recurrence describes: MINT or PARFM under pattern-1/pattern-2 with
/// k <= M, timely REFs, one window, blast radius 1 and no transitive
/// disturbance.
///
/// The victim of a row fails once T activations land without a mitigation
/// in between. The final activation needs no REF after it, so over K
/// activations this is the recurrence at T-1 over K-1 mitigation chances;
/// rows are combined with the union bound.
pub fn analytic_p_fail(cfg: &TrialConfig) -> Option<f64> {
    if cfg.schedule != ScheduleSpec::Timely
        || cfg.windows != 1
        || cfg.blast_radius != 1
        || cfg.transitive_disturbance
        || cfg.tracker.dmq
        || cfg.tracker.rfm.is_some()
    {
        return None;
    }
    let k = match cfg.pattern {
        PatternSpec::Static(PatternKind::Pattern1) => 1,
        PatternSpec::Static(PatternKind::Pattern2 { k }) if k <= cfg.max_act => k,
        _ => return None,
    } as u64;
    let p = match cfg.tracker.kind {
        TrackerKind::Mint { transitive } => 1.0 / (cfg.max_act as f64 + transitive as u64 as f64),
        TrackerKind::Parfm => 1.0 / k as f64,
        _ => return None,
    };
    let acts = cfg.refi_per_window as u64;
    if cfg.trh == 1 {
        return Some(1.0);
    }
    let per_row = failure_probability(cfg.trh - 1, p, acts - 1).ok()?;
    Some((k as f64 * per_row).min(1.0))
}

//! The `mintrh`, `sweep`, `simulate` and `tables` commands.

use std::fmt::Write as _;

use anyhow::{anyhow, bail, Context as _, Result};
use trhsim_core::analytics::{
    comparison_table, dmq_adjust, para_window_min_trh, pattern_sweep, pattern_sweep_serial, postponement_table,
    rfm_min_trh, rfm_table, target_ttf_table, tracker_headline, transitive_exposure, undetected_activations,
    AdaEvaluator, AdaModel, HeadlineTracker, MitigationRate, Mttf, PatternClass, PatternModel, PostponementCell,
    RfmOptions, SecurityModel, SweepContext, SweepVariable, TargetMttf, ThresholdResult, TrackerModel,
    TransitiveTracker, TARGET_TTF_YEARS,
};
use trhsim_core::attacks::PatternKind;
use trhsim_core::dram::{derive_params, DerivedParams};
use trhsim_core::montecarlo::{analytic_p_fail, run_trials, Estimate, PatternSpec, ScheduleSpec, TrialConfig};
use trhsim_core::trackers::{OverwritePolicy, TrackerKind, TrackerSpec};

use crate::config::{ExperimentConfig, PatternName, ScheduleName, TrackerName};

pub const MINTRH_HEADER: &str =
    "tracker,pattern,max_act,refi_per_window,target_mttf_years,min_trh,min_trh_d,p_refw,mttf_bank_years";
pub const SWEEP_HEADER: &str = "variable,value,series,pattern,min_trh,min_trh_d,p_refw,mttf_bank_years";
pub const TRIAL_HEADER: &str = "index,seed,failed,failing_row,failing_refi,max_disturbance,mitigations";

/// Six significant digits in scientific notation.
pub fn sci(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v:.5e}")
    }
}

fn years(m: &Mttf) -> String {
    sci(m.years())
}

pub fn derived(cfg: &ExperimentConfig) -> Result<DerivedParams> {
    let d = derive_params(&cfg.timings, cfg.rounding, cfg.refi_per_window)?;
    Ok(match cfg.max_act {
        Some(m) => DerivedParams::with_max_act(m, d.refi_per_window, d.t_refw_ns)?,
        None => d,
    })
}

fn headline(tracker: TrackerName) -> HeadlineTracker {
    match tracker {
        TrackerName::Mint => HeadlineTracker::Mint,
        TrackerName::Para | TrackerName::ParaNoOverwrite => HeadlineTracker::Para,
        TrackerName::Parfm => HeadlineTracker::Parfm,
        TrackerName::Prct => HeadlineTracker::Prct,
        TrackerName::MisraGries | TrackerName::Mithril => HeadlineTracker::Mithril,
    }
}

fn unsupported(cfg: &ExperimentConfig, tracker: TrackerName) -> anyhow::Error {
    anyhow!(
        "pattern `{}` has no analytical model for tracker `{tracker}`; try `simulate`",
        cfg.pattern
    )
}

/// A row of the `mintrh` output.
struct MinTrhRow {
    pattern: String,
    min_trh: u64,
    min_trh_d: u64,
    p_refw: f64,
    mttf: Mttf,
}

impl From<ThresholdResult> for MinTrhRow {
    fn from(r: ThresholdResult) -> Self {
        Self {
            pattern: r.pattern,
            min_trh: r.min_trh,
            min_trh_d: r.min_trh_d,
            p_refw: r.p_refw,
            mttf: r.mttf_bank,
        }
    }
}

fn mint_model(cfg: &ExperimentConfig, d: &DerivedParams) -> Result<Option<ThresholdResult>> {
    let target = TargetMttf(cfg.target_mttf);
    let m = d.max_act as u64;
    let tracker = TrackerModel::Mint {
        transitive: cfg.transitive,
    };
    let model = |pattern| SecurityModel::new(tracker, pattern, *d).min_trh(target);
    Ok(Some(match cfg.pattern {
        PatternName::Worst if cfg.transitive => tracker_headline(HeadlineTracker::Mint, d, target)?,
        PatternName::Worst => model(PatternModel::Pattern2 { k: m })?,
        PatternName::P1 => model(PatternModel::Pattern1)?,
        PatternName::P2 => model(PatternModel::Pattern2 {
            k: cfg.k.map_or(m, u64::from),
        })?,
        PatternName::P3 => {
            let c = cfg.c as u64;
            let k = cfg.k.map_or(m / c.max(1), u64::from);
            model(PatternModel::Pattern3 { k, c })?
        }
        PatternName::Ada => {
            let mut e = AdaEvaluator::new(AdaModel::mint(d, cfg.sided), target)?;
            match cfg.mp {
                Some(mp) => e.at(mp)?,
                None => e.peak()?.result,
            }
        }
        _ => return Ok(None),
    }))
}

fn timely_row(cfg: &ExperimentConfig, tracker: TrackerName, d: &DerivedParams) -> Result<ThresholdResult> {
    let target = TargetMttf(cfg.target_mttf);
    let is_mint = tracker == TrackerName::Mint;
    if let Some(th) = cfg.rfm_th {
        if !is_mint {
            bail!("rfm_th is only modelled for tracker `mint`");
        }
        let opts = RfmOptions {
            transitive_slot: cfg.rfm_transitive,
            with_dmq: cfg.dmq,
            delay_factor: cfg.rfm_delay,
        };
        return Ok(rfm_min_trh(MitigationRate::Rfm { rfm_th: th }, d, target, opts)?);
    }
    if cfg.pattern == PatternName::Transitive {
        let exposed = match tracker {
            TrackerName::Mint => TransitiveTracker::Mint {
                transitive: cfg.transitive,
            },
            TrackerName::Para | TrackerName::ParaNoOverwrite => TransitiveTracker::Para,
            TrackerName::Parfm => TransitiveTracker::Parfm,
            TrackerName::Prct => TransitiveTracker::Prct,
            TrackerName::MisraGries | TrackerName::Mithril => TransitiveTracker::MisraGries,
        };
        let t = transitive_exposure(exposed, d)
            .min_trh()
            .ok_or_else(|| anyhow!("tracker `{tracker}` is immune to the transitive attack"))?;
        return Ok(ThresholdResult::deterministic(t, "transitive"));
    }
    let m = d.max_act as u64;
    match (tracker, cfg.pattern) {
        (TrackerName::Mint, _) => mint_model(cfg, d)?.ok_or_else(|| unsupported(cfg, tracker)),
        (TrackerName::Parfm, PatternName::P1 | PatternName::P2) => {
            let k = match cfg.pattern {
                PatternName::P1 => 1,
                _ => cfg.k.map_or(m, u64::from),
            };
            Ok(SecurityModel::new(TrackerModel::Parfm, PatternModel::Pattern2 { k }, *d).min_trh(target)?)
        }
        (TrackerName::Prct, PatternName::Feinting) | (_, PatternName::Worst) => {
            Ok(tracker_headline(headline(tracker), d, target)?)
        }
        _ => Err(unsupported(cfg, tracker)),
    }
}

fn postponed_row(cfg: &ExperimentConfig, tracker: TrackerName, d: &DerivedParams) -> Result<MinTrhRow> {
    let target = TargetMttf(cfg.target_mttf);
    let limit = cfg.postpone_limit;
    let m = d.max_act;
    let timely = timely_row(cfg, tracker, d)?;
    let undetected = || MinTrhRow {
        pattern: format!("decoy(limit={limit};undetected)"),
        min_trh: undetected_activations(d, limit),
        min_trh_d: undetected_activations(d, limit),
        p_refw: 1.0,
        mttf: Mttf::Finite {
            seconds: d.t_refw_secs(),
        },
    };
    let generic = || dmq_adjust(&timely, PatternClass::Generic, m, limit).into();
    let single_act = || dmq_adjust(&timely, PatternClass::SingleActPerRefi, m, limit).into();
    Ok(match (tracker, cfg.dmq) {
        (TrackerName::Prct | TrackerName::MisraGries | TrackerName::Mithril, _) => generic(),
        (TrackerName::Parfm, false) | (TrackerName::Mint, false) => undetected(),
        (TrackerName::Parfm, true) => generic(),
        (TrackerName::Para | TrackerName::ParaNoOverwrite, false) => {
            para_window_min_trh(d, (limit as u64 + 1) * m as u64, target)?.into()
        }
        (TrackerName::Para | TrackerName::ParaNoOverwrite, true) => single_act(),
        (TrackerName::Mint, true) if cfg.pattern == PatternName::Worst && cfg.rfm_th.is_none() => {
            let model = AdaModel::mint(d, trhsim_core::analytics::Sided::Double);
            AdaEvaluator::new(model, target)?.peak()?.result.into()
        }
        (TrackerName::Mint, true) if cfg.pattern == PatternName::Ada || cfg.rfm_th.is_some() => timely.into(),
        (TrackerName::Mint, true) => single_act(),
    })
}

pub fn mintrh(cfg: &ExperimentConfig) -> Result<String> {
    let d = derived(cfg)?;
    let trackers = cfg.trackers.clone().unwrap_or_else(|| vec![cfg.tracker]);
    let mut out = format!("{MINTRH_HEADER}\n");
    for tracker in trackers {
        let row = match cfg.schedule {
            ScheduleName::Timely => timely_row(cfg, tracker, &d)?.into(),
            ScheduleName::Postponed | ScheduleName::Randomized => postponed_row(cfg, tracker, &d)?,
        };
        let pattern = if cfg.dmq && cfg.schedule != ScheduleName::Timely && !row.pattern.contains("dmq") {
            format!("{}+dmq", row.pattern)
        } else {
            row.pattern
        };
        writeln!(
            out,
            "{tracker},{pattern},{},{},{},{},{},{},{}",
            d.max_act,
            d.refi_per_window,
            cfg.target_mttf,
            row.min_trh,
            row.min_trh_d,
            sci(row.p_refw),
            years(&row.mttf)
        )?;
    }
    Ok(out)
}

fn default_values(variable: SweepVariable, d: &DerivedParams) -> Vec<u64> {
    let m = d.max_act as u64;
    let n = d.refi_per_window as u64;
    match variable {
        SweepVariable::K => (1..=2 * m).collect(),
        SweepVariable::C => (1..=m).collect(),
        SweepVariable::TargetMttf => TARGET_TTF_YEARS.iter().map(|&y| y as u64).collect(),
        SweepVariable::MaxAct => (10..=120).step_by(10).collect(),
        SweepVariable::Mp(_) => (1..n).step_by(64).collect(),
    }
}

pub fn sweep(cfg: &ExperimentConfig) -> Result<String> {
    let d = derived(cfg)?;
    let ctx = SweepContext {
        derived: d,
        target: TargetMttf(cfg.target_mttf),
        transitive: cfg.transitive,
    };
    let values = if cfg.values.is_empty() {
        default_values(cfg.sweep, &d)
    } else {
        cfg.values.clone()
    };
    let mut points = if cfg.jobs > 1 {
        pattern_sweep(cfg.sweep, &values, &ctx)?
    } else {
        pattern_sweep_serial(cfg.sweep, &values, &ctx)?
    };
    points.sort_by(|a, b| (a.value, a.series).cmp(&(b.value, b.series)));
    let mut out = format!("{SWEEP_HEADER}\n");
    for p in points {
        let r = &p.result;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            cfg.sweep,
            p.value,
            p.series,
            r.pattern,
            r.min_trh,
            r.min_trh_d,
            sci(r.p_refw),
            years(&r.mttf_bank)
        )?;
    }
    Ok(out)
}

fn tracker_spec(cfg: &ExperimentConfig, max_act: u32) -> TrackerSpec {
    let kind = match cfg.tracker {
        TrackerName::Mint if cfg.rowpress => TrackerKind::MintRowPress {
            transitive: cfg.transitive,
        },
        TrackerName::Mint => TrackerKind::Mint {
            transitive: cfg.transitive,
        },
        TrackerName::Para => TrackerKind::Para {
            p_num: 1,
            p_den: max_act,
            policy: OverwritePolicy::Overwrite,
        },
        TrackerName::ParaNoOverwrite => TrackerKind::Para {
            p_num: 1,
            p_den: max_act,
            policy: OverwritePolicy::NoOverwrite,
        },
        TrackerName::Parfm => TrackerKind::Parfm,
        TrackerName::Prct => TrackerKind::Prct,
        TrackerName::MisraGries | TrackerName::Mithril => TrackerKind::MisraGries { entries: cfg.entries },
    };
    let spec = TrackerSpec::new(kind).with_dmq(cfg.dmq);
    match cfg.rfm_th {
        Some(th) => spec.with_rfm(th, cfg.rfm_transitive),
        None => spec,
    }
}

fn pattern_spec(cfg: &ExperimentConfig, max_act: u32) -> Result<PatternSpec> {
    let k = cfg.k.unwrap_or(max_act);
    Ok(match cfg.pattern {
        PatternName::Worst => bail!("pattern `worst` is analytical only; pick a concrete pattern to simulate"),
        PatternName::P1 => PatternSpec::Static(PatternKind::Pattern1),
        PatternName::P2 => PatternSpec::Static(PatternKind::Pattern2 { k }),
        PatternName::P3 => PatternSpec::Static(PatternKind::Pattern3 {
            k: cfg.k.unwrap_or(max_act / cfg.c.max(1)),
            c: cfg.c,
        }),
        PatternName::Single => PatternSpec::Static(PatternKind::SingleSided),
        PatternName::Double => PatternSpec::Static(PatternKind::DoubleSided),
        PatternName::Transitive => PatternSpec::Static(PatternKind::Transitive),
        PatternName::Decoy => PatternSpec::Static(PatternKind::PostponementDecoy {
            limit: cfg.postpone_limit,
        }),
        PatternName::Feinting => PatternSpec::Feinting {
            pool: cfg.k.unwrap_or(cfg.refi_per_window),
        },
        PatternName::Ada => PatternSpec::Ada {
            mp: cfg.mp.context("pattern `ada` needs `mp`")?,
            k,
            sided: cfg.sided,
        },
    })
}

pub fn trial_config(cfg: &ExperimentConfig) -> Result<TrialConfig> {
    let d = derived(cfg)?;
    let trh = cfg.trh.context("`simulate` needs `trh`")?;
    let mut t = TrialConfig::new(
        tracker_spec(cfg, d.max_act),
        pattern_spec(cfg, d.max_act)?,
        trh,
        d.max_act,
        d.refi_per_window,
    );
    t.schedule = match cfg.schedule {
        ScheduleName::Timely => ScheduleSpec::Timely,
        ScheduleName::Postponed => ScheduleSpec::MaxPostponed {
            limit: cfg.postpone_limit,
        },
        ScheduleName::Randomized => ScheduleSpec::Randomized {
            limit: cfg.postpone_limit,
        },
    };
    t.seed = cfg.seed;
    t.windows = cfg.windows;
    t.blast_radius = cfg.blast_radius;
    t.overflow = cfg.overflow;
    t.observe_victim_refreshes = cfg.observe_victim_refreshes;
    t.transitive_disturbance = cfg.transitive_disturbance;
    t.validate()?;
    Ok(t)
}

/// Aggregate summary and, when requested, the per-trial CSV.
pub struct SimulateOutput {
    pub summary: String,
    pub per_trial: Option<String>,
}

pub fn simulate(cfg: &ExperimentConfig) -> Result<SimulateOutput> {
    let t = trial_config(cfg)?;
    let outcomes = run_trials(&t, cfg.trials, cfg.jobs)?;
    let est = Estimate::from_outcomes(&outcomes)?;
    let max_disturbance = outcomes.iter().map(|o| o.max_disturbance).max().unwrap_or(0);
    let mitigations: u64 = outcomes.iter().map(|o| o.mitigations).sum();
    let mut s = String::from("{\n");
    let mut field = |k: &str, v: String| writeln!(s, "  \"{k}\": {v},");
    field("tracker", format!("\"{}\"", cfg.tracker))?;
    field("pattern", format!("\"{}\"", cfg.pattern))?;
    field("schedule", format!("\"{}\"", cfg.schedule))?;
    field("dmq", cfg.dmq.to_string())?;
    field("trh", t.trh.to_string())?;
    field("max_act", t.max_act.to_string())?;
    field("refi_per_window", t.refi_per_window.to_string())?;
    field("windows", t.windows.to_string())?;
    field("seed", t.seed.to_string())?;
    field("trials", est.trials.to_string())?;
    field("failures", est.failures.to_string())?;
    field("p_refw", sci(est.p))?;
    field("stderr", sci(est.stderr))?;
    field("max_disturbance", max_disturbance.to_string())?;
    field("mitigations", mitigations.to_string())?;
    match analytic_p_fail(&t) {
        Some(reference) => {
            let z = est.z_score(reference);
            field("analytic_p_refw", sci(reference))?;
            field("z_score", if z.is_finite() { format!("{z:.3}") } else { "inf".into() })?;
            let verdict = if z <= 3.0 { "WITHIN 3σ" } else { "OUTSIDE 3σ" };
            writeln!(s, "  \"verdict\": \"{verdict}\"")?;
        }
        None => writeln!(s, "  \"verdict\": \"no analytical reference\"")?,
    }
    s.push_str("}\n");
    let per_trial = cfg.per_trial_csv.is_some().then(|| {
        let mut csv = format!("{TRIAL_HEADER}\n");
        for o in &outcomes {
            let opt = |v: Option<u64>| v.map_or(String::new(), |v| v.to_string());
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{}",
                o.index,
                o.seed,
                o.failed as u8,
                opt(o.failing_row.map(|r| r.value() as u64)),
                opt(o.failing_refi),
                o.max_disturbance,
                o.mitigations
            );
        }
        csv
    });
    Ok(SimulateOutput { summary: s, per_trial })
}

/// Every table as `(name, csv)`.
pub fn tables(cfg: &ExperimentConfig) -> Result<Vec<(&'static str, String)>> {
    let d = derived(cfg)?;
    let target = TargetMttf(cfg.target_mttf);
    let mut comparison = String::from("tracker,min_trh,min_trh_d,p_refw,mttf_bank_years,transitive_immune\n");
    for r in comparison_table(&d, target)? {
        let t = &r.result;
        writeln!(
            comparison,
            "{},{},{},{},{},{}",
            r.tracker,
            t.min_trh,
            t.min_trh_d,
            sci(t.p_refw),
            years(&t.mttf_bank),
            r.transitive_immune
        )?;
    }
    let mut postponement =
        String::from("tracker,timely_d,postponed_d,postponed_undetected,with_dmq_d,with_dmq_ada_d\n");
    for r in postponement_table(&d, target)? {
        let undetected = matches!(r.postponed, PostponementCell::Undetected { .. });
        writeln!(
            postponement,
            "{},{},{},{},{},{}",
            r.tracker,
            r.timely.min_trh_d,
            r.postponed.min_trh_d(),
            undetected,
            r.with_dmq.min_trh_d,
            r.with_dmq_ada.map_or(String::new(), |a| a.min_trh_d.to_string())
        )?;
    }
    let opts = RfmOptions {
        transitive_slot: cfg.rfm_transitive,
        delay_factor: cfg.rfm_delay,
        ..RfmOptions::default()
    };
    let mut rfm = String::from("rate,min_trh,min_trh_d,p_refw,mttf_bank_years\n");
    for r in rfm_table(&d, target, opts)? {
        let t = &r.result;
        writeln!(
            rfm,
            "{},{},{},{},{}",
            r.rate,
            t.min_trh,
            t.min_trh_d,
            sci(t.p_refw),
            years(&t.mttf_bank)
        )?;
    }
    let mut ttf = String::from("target_bank_years,system_years,mint_d,rfm32_d,rfm16_d\n");
    for r in target_ttf_table(&d, &TARGET_TTF_YEARS)? {
        writeln!(
            ttf,
            "{},{},{},{},{}",
            r.target.years(),
            sci(r.system_years),
            r.mint.min_trh_d,
            r.rfm32.min_trh_d,
            r.rfm16.min_trh_d
        )?;
    }
    Ok(vec![
        ("comparison", comparison),
        ("postponement", postponement),
        ("rfm", rfm),
        ("target_ttf", ttf),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scientific_format_has_six_significant_digits() {
        assert_eq!(sci(1.0 / 3.0), "3.33333e-1");
        assert_eq!(sci(0.0), "0.00000e0");
        assert_eq!(sci(f64::INFINITY), "inf");
    }

    #[test]
    fn empty_tracker_list_gives_header_only() {
        let cfg = ExperimentConfig {
            trackers: Some(vec![]),
            ..Default::default()
        };
        assert_eq!(mintrh(&cfg).unwrap(), format!("{MINTRH_HEADER}\n"));
    }

    #[test]
    fn k_of_one_matches_pattern_one() {
        let mut cfg = ExperimentConfig {
            pattern: PatternName::P1,
            ..Default::default()
        };
        let p1 = mintrh(&cfg).unwrap();
        cfg.sweep = SweepVariable::K;
        cfg.values = vec![1];
        let sweep = sweep(&cfg).unwrap();
        let min_trh = |csv: &str, col: usize| csv.lines().nth(1).unwrap().split(',').nth(col).unwrap().to_string();
        assert_eq!(min_trh(&p1, 5), min_trh(&sweep, 4));
    }

    #[test]
    fn analytics_only_patterns_are_rejected_by_simulate() {
        let cfg = ExperimentConfig {
            trh: Some(10),
            ..Default::default()
        };
        assert!(trial_config(&cfg).is_err());
        let cfg = ExperimentConfig {
            pattern: PatternName::P1,
            ..Default::default()
        };
        assert!(trial_config(&cfg).is_err());
    }
}

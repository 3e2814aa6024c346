//! Flat `key = value` experiment configuration.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;
use trhsim_core::analytics::{Sided, SweepVariable, DEFAULT_TARGET_BANK_YEARS};
use trhsim_core::dram::{DramTimings, Rounding, DEFAULT_REFI_PER_WINDOW, MAX_POSTPONE_LIMIT};
use trhsim_core::trackers::OverflowPolicy;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, found {text:?}")]
    Syntax { line: usize, text: String },
    #[error("{}unknown key `{key}`", at(*.line))]
    UnknownKey { line: Option<usize>, key: String },
    #[error("{}invalid value {value:?} for `{key}`: {reason}", at(*.line))]
    InvalidValue {
        line: Option<usize>,
        key: String,
        value: String,
        reason: String,
    },
    #[error("`--set` expects key=value, got {0:?}")]
    Override(String),
}

fn at(line: Option<usize>) -> String {
    line.map(|l| format!("line {l}: ")).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackerName {
    Mint,
    Para,
    ParaNoOverwrite,
    Parfm,
    Prct,
    MisraGries,
    Mithril,
}

impl TrackerName {
    const ALL: [(TrackerName, &'static str); 7] = [
        (TrackerName::Mint, "mint"),
        (TrackerName::Para, "para"),
        (TrackerName::ParaNoOverwrite, "para_no_overwrite"),
        (TrackerName::Parfm, "parfm"),
        (TrackerName::Prct, "prct"),
        (TrackerName::MisraGries, "misra_gries"),
        (TrackerName::Mithril, "mithril"),
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternName {
    Worst,
    P1,
    P2,
    P3,
    Single,
    Double,
    Transitive,
    Decoy,
    Feinting,
    Ada,
}

impl PatternName {
    const ALL: [(PatternName, &'static str); 10] = [
        (PatternName::Worst, "worst"),
        (PatternName::P1, "p1"),
        (PatternName::P2, "p2"),
        (PatternName::P3, "p3"),
        (PatternName::Single, "single"),
        (PatternName::Double, "double"),
        (PatternName::Transitive, "transitive"),
        (PatternName::Decoy, "decoy"),
        (PatternName::Feinting, "feinting"),
        (PatternName::Ada, "ada"),
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleName {
    Timely,
    Postponed,
    Randomized,
}

impl ScheduleName {
    const ALL: [(ScheduleName, &'static str); 3] = [
        (ScheduleName::Timely, "timely"),
        (ScheduleName::Postponed, "postponed"),
        (ScheduleName::Randomized, "randomized"),
    ];
}

macro_rules! named {
    ($t:ty) => {
        impl FromStr for $t {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                <$t>::ALL
                    .iter()
                    .find(|(_, n)| *n == s)
                    .map(|(v, _)| *v)
                    .ok_or_else(|| {
                        let names: Vec<_> = <$t>::ALL.iter().map(|(_, n)| *n).collect();
                        format!("expected one of {}", names.join(", "))
                    })
            }
        }

        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let name = <$t>::ALL.iter().find(|(v, _)| v == self).map(|(_, n)| *n).unwrap_or("?");
                f.write_str(name)
            }
        }
    };
}

named!(TrackerName);
named!(PatternName);
named!(ScheduleName);

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub tracker: TrackerName,
    /// Trackers for `mintrh`; `None` means just `tracker`.
    pub trackers: Option<Vec<TrackerName>>,
    pub pattern: PatternName,
    pub k: Option<u32>,
    pub c: u32,
    pub mp: Option<u64>,
    pub sided: Sided,
    pub transitive: bool,
    pub entries: usize,
    pub dmq: bool,
    pub rfm_th: Option<u32>,
    pub rfm_transitive: bool,
    pub rfm_delay: u64,
    pub rowpress: bool,
    pub schedule: ScheduleName,
    pub postpone_limit: u32,
    pub target_mttf: f64,
    pub seed: u64,
    pub trials: u64,
    pub windows: u32,
    pub trh: Option<u64>,
    pub blast_radius: u32,
    pub timings: DramTimings,
    pub rounding: Rounding,
    pub refi_per_window: u32,
    pub max_act: Option<u32>,
    pub observe_victim_refreshes: bool,
    pub transitive_disturbance: bool,
    pub overflow: OverflowPolicy,
    pub sweep: SweepVariable,
    pub values: Vec<u64>,
    pub jobs: usize,
    pub out: Option<PathBuf>,
    pub per_trial_csv: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            tracker: TrackerName::Mint,
            trackers: None,
            pattern: PatternName::Worst,
            k: None,
            c: 1,
            mp: None,
            sided: Sided::Double,
            transitive: true,
            entries: 677,
            dmq: false,
            rfm_th: None,
            rfm_transitive: true,
            rfm_delay: 6,
            rowpress: false,
            schedule: ScheduleName::Timely,
            postpone_limit: MAX_POSTPONE_LIMIT,
            target_mttf: DEFAULT_TARGET_BANK_YEARS,
            seed: 0,
            trials: 10_000,
            windows: 1,
            trh: None,
            blast_radius: 1,
            timings: DramTimings::default(),
            rounding: Rounding::Nearest,
            refi_per_window: DEFAULT_REFI_PER_WINDOW,
            max_act: None,
            observe_victim_refreshes: true,
            transitive_disturbance: true,
            overflow: OverflowPolicy::Reject,
            sweep: SweepVariable::K,
            values: Vec::new(),
            jobs: 1,
            out: None,
            per_trial_csv: None,
        }
    }
}

fn parse<T: FromStr>(v: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    v.parse::<T>().map_err(|e| e.to_string())
}

fn parse_flag(v: &str) -> Result<bool, String> {
    match v {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        _ => Err("expected on or off".into()),
    }
}

fn flag(b: bool) -> &'static str {
    if b {
        "on"
    } else {
        "off"
    }
}

fn parse_opt<T: FromStr>(v: &str) -> Result<Option<T>, String>
where
    T::Err: fmt::Display,
{
    if v == "none" {
        Ok(None)
    } else {
        parse(v).map(Some)
    }
}

fn opt<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or("none".to_string(), |v| v.to_string())
}

/// `1,2,3`, `a..b` (inclusive) or `a..b:step`, or any comma-joined mix.
fn parse_values(v: &str) -> Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for part in v.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((lo, rest)) = part.split_once("..") {
            let (hi, step) = rest.split_once(':').unwrap_or((rest, "1"));
            let (lo, hi, step): (u64, u64, u64) = (parse(lo)?, parse(hi)?, parse(step)?);
            if step == 0 || lo > hi {
                return Err(format!("bad range {part:?}"));
            }
            out.extend((lo..=hi).step_by(step as usize));
        } else {
            out.push(parse(part)?);
        }
    }
    Ok(out)
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_sided(v: &str) -> Result<Sided, String> {
    match v {
        "single" => Ok(Sided::Single),
        "double" => Ok(Sided::Double),
        _ => Err("expected single or double".into()),
    }
}

fn sided_name(s: Sided) -> &'static str {
    match s {
        Sided::Single => "single",
        Sided::Double => "double",
    }
}

fn parse_rounding(v: &str) -> Result<Rounding, String> {
    match v {
        "floor" => Ok(Rounding::Floor),
        "ceil" => Ok(Rounding::Ceil),
        "nearest" => Ok(Rounding::Nearest),
        _ => Err("expected floor, ceil or nearest".into()),
    }
}

fn rounding_name(r: Rounding) -> &'static str {
    match r {
        Rounding::Floor => "floor",
        Rounding::Ceil => "ceil",
        Rounding::Nearest => "nearest",
    }
}

fn parse_overflow(v: &str) -> Result<OverflowPolicy, String> {
    match v {
        "reject" => Ok(OverflowPolicy::Reject),
        "tolerate" => Ok(OverflowPolicy::Tolerate),
        _ => Err("expected reject or tolerate".into()),
    }
}

fn overflow_name(o: OverflowPolicy) -> &'static str {
    match o {
        OverflowPolicy::Reject => "reject",
        OverflowPolicy::Tolerate => "tolerate",
    }
}

fn parse_trackers(v: &str) -> Result<Vec<TrackerName>, String> {
    v.split(',').map(str::trim).filter(|p| !p.is_empty()).map(parse).collect()
}

fn parse_path(v: &str) -> Result<Option<PathBuf>, String> {
    Ok((v != "none").then(|| PathBuf::from(v)))
}

fn path_name(p: &Option<PathBuf>) -> String {
    p.as_ref().map_or("none".to_string(), |p| p.display().to_string())
}

impl ExperimentConfig {
    /// Every key, in the order [`ExperimentConfig::to_text`] writes them.
    pub const KEYS: [&'static str; 37] = [
        "tracker",
        "trackers",
        "pattern",
        "k",
        "c",
        "mp",
        "sided",
        "transitive",
        "entries",
        "dmq",
        "rfm_th",
        "rfm_transitive",
        "rfm_delay",
        "rowpress",
        "schedule",
        "postpone_limit",
        "target_mttf",
        "seed",
        "trials",
        "windows",
        "trh",
        "blast_radius",
        "t_refw",
        "t_refi",
        "t_rfc",
        "t_rc",
        "rounding",
        "refi_per_window",
        "max_act",
        "observe_victim_refreshes",
        "transitive_disturbance",
        "overflow",
        "sweep",
        "values",
        "jobs",
        "out",
        "per_trial_csv",
    ];

    pub fn parse_text(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line,
                    text: raw.to_string(),
                });
            };
            cfg.set_at(key.trim(), value.trim(), Some(line))?;
        }
        Ok(cfg)
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, kv: &str) -> Result<(), ConfigError> {
        let (key, value) = kv.split_once('=').ok_or_else(|| ConfigError::Override(kv.to_string()))?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        self.set_at(key, value, None)
    }

    fn set_at(&mut self, key: &str, value: &str, line: Option<usize>) -> Result<(), ConfigError> {
        let v = value;
        let t = &mut self.timings;
        let result: Result<(), String> = match key {
            "tracker" => parse(v).map(|x| self.tracker = x),
            "trackers" => parse_trackers(v).map(|x| self.trackers = Some(x)),
            "pattern" => parse(v).map(|x| self.pattern = x),
            "k" => parse_opt(v).map(|x| self.k = x),
            "c" => parse(v).map(|x| self.c = x),
            "mp" => parse_opt(v).map(|x| self.mp = x),
            "sided" => parse_sided(v).map(|x| self.sided = x),
            "transitive" => parse_flag(v).map(|x| self.transitive = x),
            "entries" => parse(v).map(|x| self.entries = x),
            "dmq" => parse_flag(v).map(|x| self.dmq = x),
            "rfm_th" => parse_opt(v).map(|x| self.rfm_th = x),
            "rfm_transitive" => parse_flag(v).map(|x| self.rfm_transitive = x),
            "rfm_delay" => parse(v).map(|x| self.rfm_delay = x),
            "rowpress" => parse_flag(v).map(|x| self.rowpress = x),
            "schedule" => parse(v).map(|x| self.schedule = x),
            "postpone_limit" => parse(v).map(|x| self.postpone_limit = x),
            "target_mttf" => parse(v).map(|x| self.target_mttf = x),
            "seed" => parse(v).map(|x| self.seed = x),
            "trials" => parse(v).map(|x| self.trials = x),
            "windows" => parse(v).map(|x| self.windows = x),
            "trh" => parse_opt(v).map(|x| self.trh = x),
            "blast_radius" => parse(v).map(|x| self.blast_radius = x),
            "t_refw" => parse(v).map(|x| t.t_refw_ns = x),
            "t_refi" => parse(v).map(|x| t.t_refi_ns = x),
            "t_rfc" => parse(v).map(|x| t.t_rfc_ns = x),
            "t_rc" => parse(v).map(|x| t.t_rc_ns = x),
            "rounding" => parse_rounding(v).map(|x| self.rounding = x),
            "refi_per_window" => parse(v).map(|x| self.refi_per_window = x),
            "max_act" => parse_opt(v).map(|x| self.max_act = x),
            "observe_victim_refreshes" => parse_flag(v).map(|x| self.observe_victim_refreshes = x),
            "transitive_disturbance" => parse_flag(v).map(|x| self.transitive_disturbance = x),
            "overflow" => parse_overflow(v).map(|x| self.overflow = x),
            "sweep" => parse(v).map(|x| self.sweep = x),
            "values" => parse_values(v).map(|x| self.values = x),
            "jobs" => parse(v).map(|x| self.jobs = x),
            "out" => parse_path(v).map(|x| self.out = x),
            "per_trial_csv" => parse_path(v).map(|x| self.per_trial_csv = x),
            _ => {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                })
            }
        };
        result.map_err(|reason| ConfigError::InvalidValue {
            line,
            key: key.to_string(),
            value: v.to_string(),
            reason,
        })
    }

    fn get(&self, key: &str) -> Option<String> {
        let t = &self.timings;
        Some(match key {
            "tracker" => self.tracker.to_string(),
            "trackers" => return self.trackers.as_ref().map(|v| join(v)),
            "pattern" => self.pattern.to_string(),
            "k" => opt(&self.k),
            "c" => self.c.to_string(),
            "mp" => opt(&self.mp),
            "sided" => sided_name(self.sided).to_string(),
            "transitive" => flag(self.transitive).to_string(),
            "entries" => self.entries.to_string(),
            "dmq" => flag(self.dmq).to_string(),
            "rfm_th" => opt(&self.rfm_th),
            "rfm_transitive" => flag(self.rfm_transitive).to_string(),
            "rfm_delay" => self.rfm_delay.to_string(),
            "rowpress" => flag(self.rowpress).to_string(),
            "schedule" => self.schedule.to_string(),
            "postpone_limit" => self.postpone_limit.to_string(),
            "target_mttf" => self.target_mttf.to_string(),
            "seed" => self.seed.to_string(),
            "trials" => self.trials.to_string(),
            "windows" => self.windows.to_string(),
            "trh" => opt(&self.trh),
            "blast_radius" => self.blast_radius.to_string(),
            "t_refw" => t.t_refw_ns.to_string(),
            "t_refi" => t.t_refi_ns.to_string(),
            "t_rfc" => t.t_rfc_ns.to_string(),
            "t_rc" => t.t_rc_ns.to_string(),
            "rounding" => rounding_name(self.rounding).to_string(),
            "refi_per_window" => self.refi_per_window.to_string(),
            "max_act" => opt(&self.max_act),
            "observe_victim_refreshes" => flag(self.observe_victim_refreshes).to_string(),
            "transitive_disturbance" => flag(self.transitive_disturbance).to_string(),
            "overflow" => overflow_name(self.overflow).to_string(),
            "sweep" => self.sweep.to_string(),
            "values" => join(&self.values),
            "jobs" => self.jobs.to_string(),
            "out" => path_name(&self.out),
            "per_trial_csv" => path_name(&self.per_trial_csv),
            _ => return None,
        })
    }

    /// Writes every set key; parsing the text yields an equal config.
    pub fn to_text(&self) -> String {
        Self::KEYS
            .iter()
            .filter_map(|k| self.get(k).map(|v| format!("{k} = {v}\n")))
            .collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, reason: &str| ConfigError::InvalidValue {
            line: None,
            key: key.to_string(),
            value: self.get(key).unwrap_or_default(),
            reason: reason.to_string(),
        };
        if !(self.target_mttf > 0.0 && self.target_mttf.is_finite()) {
            return Err(bad("target_mttf", "must be a positive number of years"));
        }
        if self.postpone_limit > MAX_POSTPONE_LIMIT {
            return Err(bad("postpone_limit", "at most 4 REFs can be postponed"));
        }
        if self.jobs == 0 {
            return Err(bad("jobs", "need at least one worker"));
        }
        if self.trials == 0 {
            return Err(bad("trials", "need at least one trial"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::parse_text(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn edited_config_round_trips() {
        let text = "\
# postponement study
tracker = para
trackers = prct, parfm,mint
pattern = p3
k = 24
c = 3
mp = 1400
sided = single
dmq = on
rfm_th = 32
schedule = randomized
target_mttf = 1000000
values = 1..5, 10..20:5
out = results/run.csv
";
        let cfg = ExperimentConfig::parse_text(text).unwrap();
        assert_eq!(cfg.values, vec![1, 2, 3, 4, 5, 10, 15, 20]);
        assert_eq!(cfg.trackers.as_deref(), Some(&[TrackerName::Prct, TrackerName::Parfm, TrackerName::Mint][..]));
        assert_eq!(ExperimentConfig::parse_text(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn every_key_is_accepted() {
        let cfg = ExperimentConfig {
            trackers: Some(vec![]),
            ..Default::default()
        };
        let text = cfg.to_text();
        assert_eq!(text.lines().count(), ExperimentConfig::KEYS.len());
        assert_eq!(ExperimentConfig::parse_text(&text).unwrap(), cfg);
    }

    #[test]
    fn diagnostics_carry_line_and_key() {
        let err = ExperimentConfig::parse_text("seed = 1\n\nbogus = 3\n").unwrap_err();
        assert_eq!(err.to_string(), "line 3: unknown key `bogus`");
        let err = ExperimentConfig::parse_text("dmq = maybe").unwrap_err();
        assert_eq!(err.to_string(), "line 1: invalid value \"maybe\" for `dmq`: expected on or off");
        let err = ExperimentConfig::parse_text("tracker mint").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 1, .. }));
        assert!(ExperimentConfig::parse_text("values = 5..1").is_err());
    }

    #[test]
    fn overrides() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_override("k=12").unwrap();
        assert_eq!(cfg.k, Some(12));
        assert!(cfg.apply_override("k").is_err());
        assert!(cfg.apply_override("nope=1").is_err());
    }
}

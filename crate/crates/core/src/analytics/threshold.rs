use std::collections::BTreeMap;
use std::fmt;

use crate::error::{invalid, violation, Error, Result};

pub const SECONDS_PER_YEAR: f64 = 365.25 * 86_400.0;

/// Default per-bank target MTTF in years.
pub const DEFAULT_TARGET_BANK_YEARS: f64 = 10_000.0;

/// Banks that can be attacked concurrently under tFAW.
pub const CONCURRENT_BANKS: u32 = 22;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mttf {
    Finite { seconds: f64 },
    Infinite,
}

impl Mttf {
    pub fn years(&self) -> f64 {
        match self {
            Mttf::Finite { seconds } => seconds / SECONDS_PER_YEAR,
            Mttf::Infinite => f64::INFINITY,
        }
    }

    /// System MTTF when `banks` banks are attacked at once.
    pub fn system(&self, banks: u32) -> Mttf {
        match self {
            Mttf::Finite { seconds } => Mttf::Finite {
                seconds: seconds / banks as f64,
            },
            Mttf::Infinite => Mttf::Infinite,
        }
    }
}

impl fmt::Display for Mttf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mttf::Finite { .. } => write!(f, "{:.5e} years", self.years()),
            Mttf::Infinite => write!(f, "inf"),
        }
    }
}

/// Bank MTTF for a per-window failure probability.
pub fn mttf(p_refw: f64, t_refw_secs: f64) -> Result<Mttf> {
    if !(0.0..=1.0).contains(&p_refw) || p_refw.is_nan() {
        return Err(invalid(format!("P_REFW {p_refw} outside [0, 1]")));
    }
    if p_refw == 0.0 {
        return Ok(Mttf::Infinite);
    }
    Ok(Mttf::Finite {
        seconds: t_refw_secs / p_refw,
    })
}

/// Target bank MTTF in years.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetMttf(pub f64);

impl Default for TargetMttf {
    fn default() -> Self {
        TargetMttf(DEFAULT_TARGET_BANK_YEARS)
    }
}

impl TargetMttf {
    pub fn years(self) -> f64 {
        self.0
    }

    /// Largest P_REFW that still meets the target.
    pub fn max_p_refw(self, t_refw_secs: f64) -> f64 {
        t_refw_secs / (self.0 * SECONDS_PER_YEAR)
    }

    pub fn validate(self) -> Result<Self> {
        if !(self.0 > 0.0 && self.0.is_finite()) {
            return Err(invalid(format!("target MTTF {} years must be positive", self.0)));
        }
        Ok(self)
    }
}

/// Outcome of a MinTRH computation.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdResult {
    pub min_trh: u64,
    pub min_trh_d: u64,
    /// P_REFW at `min_trh`; zero for deterministic bounds.
    pub p_refw: f64,
    pub mttf_bank: Mttf,
    pub pattern: String,
}

impl ThresholdResult {
    pub fn new(min_trh: u64, p_refw: f64, t_refw_secs: f64, pattern: impl Into<String>) -> Result<Self> {
        Ok(Self {
            min_trh,
            min_trh_d: min_trh.div_ceil(2),
            p_refw,
            mttf_bank: mttf(p_refw, t_refw_secs)?,
            pattern: pattern.into(),
        })
    }

    /// A threshold reached deterministically by an attack and never exceeded.
    pub fn deterministic(min_trh: u64, pattern: impl Into<String>) -> Self {
        Self {
            min_trh,
            min_trh_d: min_trh.div_ceil(2),
            p_refw: 0.0,
            mttf_bank: Mttf::Infinite,
            pattern: pattern.into(),
        }
    }

    /// The same result shifted by `delta` victim hammers.
    pub fn shifted(&self, delta: u64, pattern: impl Into<String>) -> Self {
        let min_trh = self.min_trh + delta;
        Self {
            min_trh,
            min_trh_d: min_trh.div_ceil(2),
            p_refw: self.p_refw,
            mttf_bank: self.mttf_bank,
            pattern: pattern.into(),
        }
    }
}

/// Smallest T in `lo..=hi` with `p_at(T) <= target_p`.
///
/// Every evaluated point is kept; the search fails if the evaluations are not
/// non-increasing in T, and the returned threshold is bracketed by a passing
/// point at T and a failing point at T-1 (unless T = lo).
pub fn search_min_trh<F>(lo: u64, hi: u64, target_p: f64, mut p_at: F) -> Result<(u64, f64)>
where
    F: FnMut(u64) -> Result<f64>,
{
    if lo == 0 || lo > hi {
        return Err(invalid(format!("empty search range {lo}..={hi}")));
    }
    let mut seen: BTreeMap<u64, f64> = BTreeMap::new();
    let mut eval = |t: u64, seen: &mut BTreeMap<u64, f64>| -> Result<f64> {
        if let Some(&v) = seen.get(&t) {
            return Ok(v);
        }
        let v = p_at(t)?;
        seen.insert(t, v);
        Ok(v)
    };
    eval(lo, &mut seen)?;
    if eval(hi, &mut seen)? > target_p {
        return Err(Error::TargetUnreachable(format!(
            "P_REFW at T={hi} still exceeds {target_p:.3e}"
        )));
    }
    let (mut a, mut b) = (lo, hi);
    while a < b {
        let mid = a + (b - a) / 2;
        if eval(mid, &mut seen)? <= target_p {
            b = mid;
        } else {
            a = mid + 1;
        }
    }
    let p_min = eval(a, &mut seen)?;
    if a > lo {
        eval(a - 1, &mut seen)?;
    }
    let mut prev = f64::INFINITY;
    for (&t, &v) in &seen {
        if v > prev {
            return Err(violation(format!("P_REFW is not monotone in T near T={t}")));
        }
        prev = v;
    }
    debug_assert!(p_min <= target_p);
    debug_assert!(a == lo || seen[&(a - 1)] > target_p);
    Ok((a, p_min))
}

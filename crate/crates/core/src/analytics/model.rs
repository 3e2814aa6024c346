use std::fmt;

use super::recurrence::failure_curve;
use super::threshold::{search_min_trh, TargetMttf, ThresholdResult};
use crate::dram::DerivedParams;
use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Tracker as seen by the analytical model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackerModel {
    Mint { transitive: bool },
    Parfm,
    /// InDRAM-PARA with sampling probability `p_num/p_den`, attacked at the
    /// worst position of an interval holding `window` activations.
    Para { p_num: u64, p_den: u64, window: u64 },
}

impl TrackerModel {
    /// InDRAM-PARA with p = 1/M and one tREFI per interval.
    pub fn para(max_act: u32) -> Self {
        TrackerModel::Para {
            p_num: 1,
            p_den: max_act as u64,
            window: max_act as u64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternModel {
    Pattern1,
    Pattern2 { k: u64 },
    Pattern3 { k: u64, c: u64 },
    ParaWorstPosition,
}

impl fmt::Display for PatternModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternModel::Pattern1 => write!(f, "p1"),
            PatternModel::Pattern2 { k } => write!(f, "p2(k={k})"),
            PatternModel::Pattern3 { k, c } => write!(f, "p3(k={k};c={c})"),
            PatternModel::ParaWorstPosition => write!(f, "para_worst"),
        }
    }
}

/// Per-activation mitigation probability of one attack row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowProbability {
    Ratio { num: u64, den: u64 },
    /// `p(1-p)^(window-1)`: sampled first, then survives the rest of the interval.
    SampledAndSurvived { p_num: u64, p_den: u64, window: u64 },
}

impl RowProbability {
    pub fn value<S: Scalar>(&self) -> S {
        match *self {
            RowProbability::Ratio { num, den } => S::from_ratio(num, den),
            RowProbability::SampledAndSurvived { p_num, p_den, window } => {
                let p = S::from_ratio(p_num, p_den);
                p.clone() * (S::one() - p).powu(window - 1)
            }
        }
    }
}

/// Failure model for one pattern against one tracker.
///
/// Each of `rows` attack rows gets `trials` independent mitigation chances per
/// window; between chances it receives `hammers_per_trial` activations. A
/// successful run of T hammers takes `ceil(T * seq_num / seq_den)` tREFI, which
/// feeds the auto-refresh factor `1 - N_seq / window_units`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowModel {
    pub p: RowProbability,
    pub trials: u64,
    pub rows: u64,
    pub hammers_per_trial: u64,
    pub seq_num: u64,
    pub seq_den: u64,
    pub window_units: u64,
}

impl RowModel {
    /// Largest T this pattern can deliver within one window.
    pub fn max_trh(&self) -> u64 {
        self.trials * self.hammers_per_trial
    }

    pub fn p_refw<S: Scalar>(&self, trh: u64) -> Result<S> {
        if trh == 0 {
            return Err(invalid("threshold T must be at least 1"));
        }
        let escapes = trh.div_ceil(self.hammers_per_trial);
        if escapes > self.trials {
            return Ok(S::zero());
        }
        let curve = failure_curve(escapes, self.p.value::<S>(), self.trials)?;
        let union = (S::from_u64(self.rows) * curve.last()).clamp_unit();
        let seq = (trh * self.seq_num).div_ceil(self.seq_den);
        let refresh = (S::one() - S::from_ratio(seq, self.window_units)).clamp_unit();
        Ok(union * refresh)
    }
}

/// A tracker, an attack pattern and the DRAM geometry they run on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecurityModel {
    pub tracker: TrackerModel,
    pub pattern: PatternModel,
    pub derived: DerivedParams,
}

impl SecurityModel {
    pub fn new(tracker: TrackerModel, pattern: PatternModel, derived: DerivedParams) -> Self {
        Self {
            tracker,
            pattern,
            derived,
        }
    }

    pub fn descriptor(&self) -> String {
        let t = match self.tracker {
            TrackerModel::Mint { transitive: true } => "mint+transitive".to_string(),
            TrackerModel::Mint { transitive: false } => "mint".to_string(),
            TrackerModel::Parfm => "parfm".to_string(),
            TrackerModel::Para { window, .. } => format!("para(window={window})"),
        };
        format!("{t}/{}", self.pattern)
    }

    pub fn row_model(&self) -> Result<RowModel> {
        let m = self.derived.max_act as u64;
        let n = self.derived.refi_per_window as u64;
        let ratio = |num, den| RowProbability::Ratio { num, den };
        let single = |p, rows| RowModel {
            p,
            trials: n,
            rows,
            hammers_per_trial: 1,
            seq_num: 1,
            seq_den: 1,
            window_units: n,
        };
        let spread = |p, k: u64| RowModel {
            p,
            trials: n * m / k,
            rows: k,
            hammers_per_trial: 1,
            seq_num: k,
            seq_den: m,
            window_units: n,
        };
        let pattern = match self.pattern {
            PatternModel::Pattern1 => PatternModel::Pattern2 { k: 1 },
            other => other,
        };
        match (self.tracker, pattern) {
            (TrackerModel::Mint { transitive }, PatternModel::Pattern2 { k }) => {
                let slots = m + transitive as u64;
                check_rows(k)?;
                Ok(if k <= m {
                    single(ratio(1, slots), k)
                } else {
                    spread(ratio(1, slots), k)
                })
            }
            (TrackerModel::Mint { transitive }, PatternModel::Pattern3 { k, c }) => {
                check_rows(k)?;
                if c == 0 || k * c > m {
                    return Err(invalid(format!("pattern-3 needs 1 <= k*c <= M, got k={k}, c={c}")));
                }
                let slots = m + transitive as u64;
                Ok(RowModel {
                    p: ratio(c, slots),
                    trials: n,
                    rows: k,
                    hammers_per_trial: c,
                    seq_num: 1,
                    seq_den: c,
                    window_units: n,
                })
            }
            (TrackerModel::Parfm, PatternModel::Pattern2 { k }) => {
                check_rows(k)?;
                Ok(if k <= m {
                    single(ratio(1, k), k)
                } else {
                    spread(ratio(1, m), k)
                })
            }
            (TrackerModel::Para { p_num, p_den, window }, PatternModel::ParaWorstPosition) => {
                if p_num == 0 || p_num > p_den || window == 0 {
                    return Err(invalid("PARA needs 0 < p <= 1 and a non-empty window"));
                }
                Ok(RowModel {
                    p: RowProbability::SampledAndSurvived { p_num, p_den, window },
                    trials: n * m,
                    rows: 1,
                    hammers_per_trial: 1,
                    seq_num: 1,
                    seq_den: m,
                    window_units: n,
                })
            }
            (tracker, pattern) => Err(invalid(format!(
                "pattern {pattern} is not modelled for {tracker:?}"
            ))),
        }
    }

    pub fn p_refw<S: Scalar>(&self, trh: u64) -> Result<S> {
        self.row_model()?.p_refw(trh)
    }

    pub fn min_trh(&self, target: TargetMttf) -> Result<ThresholdResult> {
        let rm = self.row_model()?;
        let t_refw = self.derived.t_refw_secs();
        let target_p = target.validate()?.max_p_refw(t_refw);
        let (trh, p) = search_min_trh(1, rm.max_trh(), target_p, |t| rm.p_refw::<f64>(t))?;
        ThresholdResult::new(trh, p, t_refw, self.descriptor())
    }
}

fn check_rows(k: u64) -> Result<()> {
    if k == 0 {
        return Err(invalid("attack patterns need at least one row"));
    }
    Ok(())
}

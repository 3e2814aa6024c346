use std::collections::HashMap;

use super::markov::count_tail;
use super::model::{RowModel, RowProbability};
use super::threshold::{search_min_trh, TargetMttf, ThresholdResult};
use crate::dram::{DerivedParams, MAX_POSTPONE_LIMIT};
use crate::error::{invalid, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sided {
    Single,
    Double,
}

impl Sided {
    /// Victim hammers contributed per tREFI.
    pub fn hammers(self) -> u64 {
        match self {
            Sided::Single => 1,
            Sided::Double => 2,
        }
    }
}

/// Adaptive attack against a slot-based tracker behind a DMQ.
///
/// The attacker runs pattern-2 over `rows` rows until tREFI `mp`, then spends
/// a `burst`-ACT postponement window on its target. Burst cycles repeat
/// `floor(windows / (mp + ceil(burst / h)))` times per refresh window, where h
/// is [`Sided::hammers`]. The ADA path fails when the target already holds
/// `ceil((T - burst) / h)` unmitigated steps at the morph point; the result is
/// the worse of that path and the plain pattern-2 path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdaModel {
    pub p_num: u64,
    pub p_den: u64,
    pub rows: u64,
    /// Mitigation opportunities per refresh window.
    pub windows: u64,
    pub burst: u64,
    pub sided: Sided,
    pub t_refw_ns: u64,
}

impl AdaModel {
    /// MINT at 1x rate: p = 1/M over M rows, 8192 opportunities, 365-ACT bursts.
    pub fn mint(derived: &DerivedParams, sided: Sided) -> Self {
        let m = derived.max_act as u64;
        Self {
            p_num: 1,
            p_den: m,
            rows: m,
            windows: derived.refi_per_window as u64,
            burst: (MAX_POSTPONE_LIMIT as u64 + 1) * m,
            sided,
            t_refw_ns: derived.t_refw_ns,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.p_num == 0 || self.p_num >= self.p_den || self.rows == 0 || self.windows < 2 {
            return Err(invalid(format!("degenerate ADA model {self:?}")));
        }
        Ok(())
    }

    fn base_model(&self) -> RowModel {
        RowModel {
            p: RowProbability::Ratio {
                num: self.p_num,
                den: self.p_den,
            },
            trials: self.windows,
            rows: self.rows,
            hammers_per_trial: 1,
            seq_num: 1,
            seq_den: 1,
            window_units: self.windows,
        }
    }

    fn repeats(&self, mp: u64) -> u64 {
        self.windows / (mp + self.burst.div_ceil(self.sided.hammers()))
    }

    /// Failure probability of the ADA path alone at morph point `mp`.
    pub fn p_ada<S: Scalar>(&self, trh: u64, mp: u64) -> S {
        let h = self.sided.hammers();
        let need = trh.saturating_sub(self.burst).div_ceil(h);
        let r = self.repeats(mp);
        if r == 0 {
            return S::zero();
        }
        let p = S::from_ratio(self.p_num, self.p_den);
        let step_survive = (S::one() - p).powu(h);
        let tail = count_tail(S::one() - step_survive, need, mp);
        (S::from_u64(r * self.rows) * tail).clamp_unit()
    }

    pub fn p_base<S: Scalar>(&self, trh: u64) -> Result<S> {
        self.base_model().p_refw(trh)
    }

    pub fn p_refw(&self, trh: u64, mp: u64) -> Result<f64> {
        let base: f64 = self.p_base(trh)?;
        Ok(base.max(self.p_ada(trh, mp)))
    }

    fn max_trh(&self) -> u64 {
        self.windows * self.sided.hammers() + self.burst
    }

    fn descriptor(&self, mp: Option<u64>) -> String {
        let sided = match self.sided {
            Sided::Single => "single",
            Sided::Double => "double",
        };
        match mp {
            Some(mp) => format!("ada({sided};mp={mp};k={};w={})", self.rows, self.windows),
            None => format!("ada({sided};peak;k={};w={})", self.rows, self.windows),
        }
    }
}

/// One point of an MP sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaPoint {
    pub mp: u64,
    pub result: ThresholdResult,
}

/// Evaluates an [`AdaModel`] across morph points, sharing the base-path work.
pub struct AdaEvaluator {
    model: AdaModel,
    target_p: f64,
    t_refw: f64,
    base_trh: u64,
    base_cache: HashMap<u64, f64>,
}

impl AdaEvaluator {
    pub fn new(model: AdaModel, target: TargetMttf) -> Result<Self> {
        model.validate()?;
        let t_refw = model.t_refw_ns as f64 * 1e-9;
        let target_p = target.validate()?.max_p_refw(t_refw);
        let base = model.base_model();
        let (base_trh, _) = search_min_trh(1, base.max_trh(), target_p, |t| base.p_refw::<f64>(t))?;
        Ok(Self {
            model,
            target_p,
            t_refw,
            base_trh,
            base_cache: HashMap::new(),
        })
    }

    pub fn model(&self) -> &AdaModel {
        &self.model
    }

    /// MinTRH of the plain pattern-2 path.
    pub fn base_trh(&self) -> u64 {
        self.base_trh
    }

    fn base_p(&mut self, trh: u64) -> Result<f64> {
        if let Some(&v) = self.base_cache.get(&trh) {
            return Ok(v);
        }
        let v = self.model.p_base(trh)?;
        self.base_cache.insert(trh, v);
        Ok(v)
    }

    pub fn at(&mut self, mp: u64) -> Result<ThresholdResult> {
        if mp == 0 || mp >= self.model.windows {
            return Err(invalid(format!(
                "morph point {mp} outside 1..{}",
                self.model.windows
            )));
        }
        let model = self.model;
        let target_p = self.target_p;
        let (ada_trh, _) =
            search_min_trh(1, model.max_trh(), target_p, |t| Ok(model.p_ada::<f64>(t, mp)))?;
        let trh = ada_trh.max(self.base_trh);
        let p = self.base_p(trh)?.max(model.p_ada(trh, mp));
        if trh > 1 {
            let below = self.base_p(trh - 1)?.max(model.p_ada(trh - 1, mp));
            debug_assert!(below > target_p && p <= target_p);
        }
        ThresholdResult::new(trh, p, self.t_refw, model.descriptor(Some(mp)))
    }

    pub fn sweep(&mut self, mps: impl IntoIterator<Item = u64>) -> Result<Vec<AdaPoint>> {
        mps.into_iter()
            .map(|mp| Ok(AdaPoint { mp, result: self.at(mp)? }))
            .collect()
    }

    /// The worst morph point over the whole useful range.
    pub fn peak(&mut self) -> Result<AdaPoint> {
        let mut best: Option<AdaPoint> = None;
        for mp in 1..self.model.windows {
            let result = self.at(mp)?;
            if best.as_ref().is_none_or(|b| result.min_trh > b.result.min_trh) {
                best = Some(AdaPoint { mp, result });
            }
        }
        let mut best = best.expect("range is non-empty");
        best.result.pattern = self.model.descriptor(None);
        Ok(best)
    }
}

/// MinTRH under ADA at a single morph point.
pub fn ada_min_trh(mp: u64, sided: Sided, derived: &DerivedParams, target: TargetMttf) -> Result<ThresholdResult> {
    AdaEvaluator::new(AdaModel::mint(derived, sided), target)?.at(mp)
}

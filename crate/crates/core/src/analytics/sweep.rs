use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::ada::{AdaEvaluator, AdaModel, Sided};
use super::model::{PatternModel, SecurityModel, TrackerModel};
use super::rfm::{rfm_min_trh, MitigationRate, RfmOptions};
use super::threshold::{TargetMttf, ThresholdResult};
use crate::dram::DerivedParams;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// Pattern-2 attack rows.
    K,
    /// Pattern-3 copies per row, with `floor(M/c)` rows.
    C,
    /// Target bank MTTF in years.
    TargetMttf,
    /// MaxACT, comparing MINT against InDRAM-PARA.
    MaxAct,
    /// ADA morphing point.
    Mp(Sided),
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepVariable::K => write!(f, "k"),
            SweepVariable::C => write!(f, "c"),
            SweepVariable::TargetMttf => write!(f, "target_mttf"),
            SweepVariable::MaxAct => write!(f, "max_act"),
            SweepVariable::Mp(Sided::Single) => write!(f, "mp"),
            SweepVariable::Mp(Sided::Double) => write!(f, "mp_double"),
        }
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "k" => SweepVariable::K,
            "c" => SweepVariable::C,
            "target_mttf" => SweepVariable::TargetMttf,
            "max_act" => SweepVariable::MaxAct,
            "mp" | "mp_single" => SweepVariable::Mp(Sided::Single),
            "mp_double" => SweepVariable::Mp(Sided::Double),
            _ => return Err(invalid(format!("unknown sweep variable '{s}'"))),
        })
    }
}

/// Shared inputs of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepContext {
    pub derived: DerivedParams,
    pub target: TargetMttf,
    pub transitive: bool,
}

impl Default for SweepContext {
    fn default() -> Self {
        Self {
            derived: DerivedParams::ddr5(),
            target: TargetMttf::default(),
            transitive: true,
        }
    }
}

/// One result at one grid value. A grid value may carry several series.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: u64,
    pub series: &'static str,
    pub result: ThresholdResult,
}

fn point(value: u64, series: &'static str, result: ThresholdResult) -> SweepPoint {
    SweepPoint { value, series, result }
}

fn evaluate(variable: SweepVariable, value: u64, ctx: &SweepContext) -> Result<Vec<SweepPoint>> {
    let d = ctx.derived;
    let mint = TrackerModel::Mint {
        transitive: ctx.transitive,
    };
    match variable {
        SweepVariable::K => {
            let r = SecurityModel::new(mint, PatternModel::Pattern2 { k: value }, d).min_trh(ctx.target)?;
            Ok(vec![point(value, "mint", r)])
        }
        SweepVariable::C => {
            let m = d.max_act as u64;
            if value == 0 || value > m {
                return Err(invalid(format!("copies c={value} outside 1..={m}")));
            }
            let pattern = PatternModel::Pattern3 { k: m / value, c: value };
            let r = SecurityModel::new(mint, pattern, d).min_trh(ctx.target)?;
            Ok(vec![point(value, "mint", r)])
        }
        SweepVariable::TargetMttf => {
            let target = TargetMttf(value as f64).validate()?;
            let o = RfmOptions::default();
            Ok(vec![
                point(value, "mint", rfm_min_trh(MitigationRate::One, &d, target, o)?),
                point(value, "rfm32", rfm_min_trh(MitigationRate::Rfm { rfm_th: 32 }, &d, target, o)?),
                point(value, "rfm16", rfm_min_trh(MitigationRate::Rfm { rfm_th: 16 }, &d, target, o)?),
            ])
        }
        SweepVariable::MaxAct => {
            let m = u32::try_from(value).map_err(|_| invalid(format!("MaxACT {value} too large")))?;
            let d = DerivedParams::with_max_act(m, d.refi_per_window, d.t_refw_ns)?;
            let k = value;
            let mint_r = SecurityModel::new(mint, PatternModel::Pattern2 { k }, d).min_trh(ctx.target)?;
            let para = SecurityModel::new(TrackerModel::para(m), PatternModel::ParaWorstPosition, d);
            Ok(vec![point(value, "mint", mint_r), point(value, "para", para.min_trh(ctx.target)?)])
        }
        SweepVariable::Mp(sided) => {
            let mut e = AdaEvaluator::new(AdaModel::mint(&d, sided), ctx.target)?;
            Ok(vec![point(value, "mint_ada", e.at(value)?)])
        }
    }
}

/// Evaluates `variable` at every value, in parallel, keeping input order.
pub fn pattern_sweep(variable: SweepVariable, values: &[u64], ctx: &SweepContext) -> Result<Vec<SweepPoint>> {
    if let SweepVariable::Mp(sided) = variable {
        return mp_sweep(sided, values, ctx);
    }
    let chunks: Vec<Vec<SweepPoint>> = values
        .par_iter()
        .map(|&v| evaluate(variable, v, ctx))
        .collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Same as [`pattern_sweep`] on the calling thread only.
pub fn pattern_sweep_serial(variable: SweepVariable, values: &[u64], ctx: &SweepContext) -> Result<Vec<SweepPoint>> {
    let mut out = Vec::new();
    for &v in values {
        out.extend(evaluate(variable, v, ctx)?);
    }
    Ok(out)
}

fn mp_sweep(sided: Sided, values: &[u64], ctx: &SweepContext) -> Result<Vec<SweepPoint>> {
    let model = AdaModel::mint(&ctx.derived, sided);
    let chunk = values.len().div_ceil(rayon::current_num_threads().max(1)).max(1);
    let parts: Vec<Vec<SweepPoint>> = values
        .par_chunks(chunk)
        .map(|vs| {
            let mut e = AdaEvaluator::new(model, ctx.target)?;
            vs.iter().map(|&mp| Ok(point(mp, "mint_ada", e.at(mp)?))).collect()
        })
        .collect::<Result<_>>()?;
    Ok(parts.into_iter().flatten().collect())
}

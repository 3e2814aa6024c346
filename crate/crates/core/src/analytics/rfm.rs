use std::fmt;
use std::str::FromStr;

use super::ada::{AdaEvaluator, AdaModel, Sided};
use super::threshold::{search_min_trh, TargetMttf, ThresholdResult};
use crate::dram::{DerivedParams, MAX_POSTPONE_LIMIT};
use crate::error::{invalid, Error, Result};

/// Mitigation rate relative to one mitigation per tREFI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MitigationRate {
    /// One mitigation every two tREFI.
    Half,
    /// One mitigation per tREFI.
    One,
    /// One mitigation per tREFI plus an RFM every `rfm_th` ACTs.
    Rfm { rfm_th: u32 },
}

impl fmt::Display for MitigationRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MitigationRate::Half => write!(f, "0.5x"),
            MitigationRate::One => write!(f, "1x"),
            MitigationRate::Rfm { rfm_th } => write!(f, "rfm{rfm_th}"),
        }
    }
}

impl FromStr for MitigationRate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "0.5x" | "half" => Ok(MitigationRate::Half),
            "1x" | "one" => Ok(MitigationRate::One),
            _ => s
                .strip_prefix("rfm")
                .and_then(|th| th.parse().ok())
                .filter(|&th: &u32| th > 0)
                .map(|rfm_th| MitigationRate::Rfm { rfm_th })
                .ok_or_else(|| invalid(format!("unknown mitigation rate '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RfmOptions {
    /// Keep MINT's transitive slot in the RFM window (URAND(0, RFM_TH)).
    pub transitive_slot: bool,
    /// Behind a DMQ the attacker may use ADA; without it only pattern-2 applies.
    pub with_dmq: bool,
    /// How many RFM windows a delayed RFM can accumulate.
    pub delay_factor: u64,
}

impl Default for RfmOptions {
    fn default() -> Self {
        Self {
            transitive_slot: true,
            with_dmq: true,
            delay_factor: 6,
        }
    }
}

/// The double-sided ADA model for a mitigation rate.
pub fn rate_model(rate: MitigationRate, derived: &DerivedParams, opts: RfmOptions) -> Result<AdaModel> {
    let m = derived.max_act as u64;
    let n = derived.refi_per_window as u64;
    let postponed_burst = (MAX_POSTPONE_LIMIT as u64 + 1) * m;
    let base = AdaModel::mint(derived, Sided::Double);
    Ok(match rate {
        MitigationRate::One => base,
        MitigationRate::Half => AdaModel {
            p_den: 2 * m,
            rows: 2 * m,
            windows: n / 2,
            burst: postponed_burst,
            ..base
        },
        MitigationRate::Rfm { rfm_th } => {
            let w = rfm_th as u64;
            if w == 0 || w > m {
                return Err(invalid(format!("RFM threshold {w} must lie in 1..={m}")));
            }
            AdaModel {
                p_den: w + opts.transitive_slot as u64,
                rows: w,
                windows: n * m / w,
                burst: opts.delay_factor * w,
                ..base
            }
        }
    })
}

/// MinTRH (double-sided) of MINT at the given mitigation rate.
pub fn rfm_min_trh(
    rate: MitigationRate,
    derived: &DerivedParams,
    target: TargetMttf,
    opts: RfmOptions,
) -> Result<ThresholdResult> {
    let model = rate_model(rate, derived, opts)?;
    let mut result = if opts.with_dmq {
        AdaEvaluator::new(model, target)?.peak()?.result
    } else {
        let t_refw = derived.t_refw_secs();
        let target_p = target.validate()?.max_p_refw(t_refw);
        let (trh, p) = search_min_trh(1, model.windows, target_p, |t| model.p_base::<f64>(t))?;
        ThresholdResult::new(trh, p, t_refw, "p2")?
    };
    result.pattern = format!("mint@{rate}/{}", result.pattern);
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip() {
        for s in ["0.5x", "1x", "rfm32", "rfm16"] {
            assert_eq!(s.parse::<MitigationRate>().unwrap().to_string(), s);
        }
        assert!("rfm0".parse::<MitigationRate>().is_err());
        assert!("2x".parse::<MitigationRate>().is_err());
    }

    #[test]
    fn rfm_window_geometry() {
        let d = DerivedParams::ddr5();
        let m = rate_model(MitigationRate::Rfm { rfm_th: 32 }, &d, RfmOptions::default()).unwrap();
        assert_eq!((m.p_den, m.rows, m.windows, m.burst), (33, 32, 18688, 192));
        let m = rate_model(MitigationRate::Rfm { rfm_th: 16 }, &d, RfmOptions::default()).unwrap();
        assert_eq!((m.p_den, m.windows), (17, 37376));
        assert!(rate_model(MitigationRate::Rfm { rfm_th: 100 }, &d, RfmOptions::default()).is_err());
    }

    #[test]
    fn higher_rates_lower_the_threshold() {
        let d = DerivedParams::ddr5();
        let t = TargetMttf::default();
        let o = RfmOptions::default();
        let half = rfm_min_trh(MitigationRate::Half, &d, t, o).unwrap().min_trh_d;
        let one = rfm_min_trh(MitigationRate::One, &d, t, o).unwrap().min_trh_d;
        let r32 = rfm_min_trh(MitigationRate::Rfm { rfm_th: 32 }, &d, t, o).unwrap().min_trh_d;
        let r16 = rfm_min_trh(MitigationRate::Rfm { rfm_th: 16 }, &d, t, o).unwrap().min_trh_d;
        assert!(half > one && one > r32 && r32 > r16, "{half} {one} {r32} {r16}");
        let no_dmq = RfmOptions { with_dmq: false, ..o };
        assert!(rfm_min_trh(MitigationRate::One, &d, t, no_dmq).unwrap().min_trh_d < one);
    }
}

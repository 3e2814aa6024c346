//! DRAM timing parameters, derived window geometry and refresh schedules.

use num_rational::Ratio;
use rand::Rng;

use crate::error::{invalid, Result};

/// tREFI intervals per refresh window used throughout the security model.
pub const DEFAULT_REFI_PER_WINDOW: u32 = 8192;

/// DDR5 allows at most four REF commands to be postponed.
pub const MAX_POSTPONE_LIMIT: u32 = 4;

/// Timing parameters in integer nanoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DramTimings {
    pub t_refw_ns: u64,
    pub t_refi_ns: u64,
    pub t_rfc_ns: u64,
    pub t_rc_ns: u64,
}

impl Default for DramTimings {
    /// DDR5 datasheet values: 32 ms, 3900 ns, 410 ns, 48 ns.
    fn default() -> Self {
        Self {
            t_refw_ns: 32_000_000,
            t_refi_ns: 3900,
            t_rfc_ns: 410,
            t_rc_ns: 48,
        }
    }
}

impl DramTimings {
    pub fn validate(&self) -> Result<()> {
        if self.t_refw_ns == 0 || self.t_refi_ns == 0 || self.t_rfc_ns == 0 || self.t_rc_ns == 0 {
            return Err(invalid("DRAM timings must be strictly positive"));
        }
        if self.t_rfc_ns >= self.t_refi_ns {
            return Err(invalid(format!(
                "tRFC ({} ns) must be below tREFI ({} ns)",
                self.t_rfc_ns, self.t_refi_ns
            )));
        }
        if self.t_refi_ns >= self.t_refw_ns {
            return Err(invalid(format!(
                "tREFI ({} ns) must be below tREFW ({} ns)",
                self.t_refi_ns, self.t_refw_ns
            )));
        }
        Ok(())
    }

    pub fn t_refw_secs(&self) -> f64 {
        self.t_refw_ns as f64 * 1e-9
    }
}

/// Rounding applied to the fractional MaxACT.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rounding {
    Floor,
    Ceil,
    #[default]
    Nearest,
}

/// Quantities derived from [`DramTimings`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DerivedParams {
    /// Exact `(tREFI - tRFC) / tRC`.
    pub max_act_real: Ratio<u64>,
    /// M, the activation slots per tREFI.
    pub max_act: u32,
    /// N, the tREFI intervals per refresh window.
    pub refi_per_window: u32,
    pub t_refw_ns: u64,
}

impl DerivedParams {
    /// Table defaults: M = 73, N = 8192, tREFW = 32 ms.
    pub fn ddr5() -> Self {
        derive_params(&DramTimings::default(), Rounding::Nearest, DEFAULT_REFI_PER_WINDOW)
            .expect("default timings are valid")
    }

    /// Parameters with MaxACT treated as a free variable.
    pub fn with_max_act(max_act: u32, refi_per_window: u32, t_refw_ns: u64) -> Result<Self> {
        if max_act == 0 || refi_per_window == 0 || t_refw_ns == 0 {
            return Err(invalid("max_act, refi_per_window and tREFW must be positive"));
        }
        Ok(Self {
            max_act_real: Ratio::from_integer(max_act as u64),
            max_act,
            refi_per_window,
            t_refw_ns,
        })
    }

    pub fn max_act_real_f64(&self) -> f64 {
        *self.max_act_real.numer() as f64 / *self.max_act_real.denom() as f64
    }

    pub fn t_refw_secs(&self) -> f64 {
        self.t_refw_ns as f64 * 1e-9
    }
}

pub fn derive_params(
    timings: &DramTimings,
    rounding: Rounding,
    refi_per_window: u32,
) -> Result<DerivedParams> {
    timings.validate()?;
    if refi_per_window == 0 {
        return Err(invalid("refi_per_window must be at least 1"));
    }
    let real = Ratio::new(timings.t_refi_ns - timings.t_rfc_ns, timings.t_rc_ns);
    let rounded = match rounding {
        Rounding::Floor => real.floor(),
        Rounding::Ceil => real.ceil(),
        Rounding::Nearest => real.round(),
    }
    .to_integer();
    if rounded == 0 {
        return Err(invalid(format!(
            "timings leave no activation slot per tREFI (MaxACT {real})"
        )));
    }
    let max_act = u32::try_from(rounded).map_err(|_| invalid("MaxACT does not fit in 32 bits"))?;
    Ok(DerivedParams {
        max_act_real: real,
        max_act,
        refi_per_window,
        t_refw_ns: timings.t_refw_ns,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefreshMode {
    Timely,
    MaxPostponed,
}

/// One REF command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RefEpoch {
    /// The REF is issued at the end of this tREFI (0-based within the window).
    pub refi: u32,
    /// tREFI intervals elapsed since the previous REF; 0 for the trailing REFs of a batch.
    pub elapsed_refi: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefreshSchedule {
    mode: RefreshMode,
    postpone_limit: u32,
    refi_per_window: u32,
    epochs: Vec<RefEpoch>,
}

impl RefreshSchedule {
    pub fn timely(refi_per_window: u32) -> Self {
        let epochs = (0..refi_per_window)
            .map(|refi| RefEpoch {
                refi,
                elapsed_refi: 1,
            })
            .collect();
        Self {
            mode: RefreshMode::Timely,
            postpone_limit: 0,
            refi_per_window,
            epochs,
        }
    }

    /// Every REF batch postpones the maximum `limit` commands.
    pub fn max_postponed(limit: u32, refi_per_window: u32) -> Result<Self> {
        check_limit(limit)?;
        let batches = std::iter::repeat(limit + 1);
        Ok(Self::from_batches(RefreshMode::MaxPostponed, limit, refi_per_window, batches))
    }

    /// Each batch postpones a uniformly drawn number of REFs in `0..=limit`.
    pub fn randomized<R: Rng + ?Sized>(limit: u32, refi_per_window: u32, rng: &mut R) -> Result<Self> {
        check_limit(limit)?;
        let sizes: Vec<u32> = (0..refi_per_window).map(|_| rng.gen_range(0..=limit) + 1).collect();
        Ok(Self::from_batches(RefreshMode::MaxPostponed, limit, refi_per_window, sizes))
    }

    fn from_batches(
        mode: RefreshMode,
        limit: u32,
        refi_per_window: u32,
        sizes: impl IntoIterator<Item = u32>,
    ) -> Self {
        let mut epochs = Vec::with_capacity(refi_per_window as usize);
        let mut start = 0u32;
        for size in sizes {
            if start >= refi_per_window {
                break;
            }
            let size = size.min(refi_per_window - start);
            let end = start + size - 1;
            epochs.push(RefEpoch {
                refi: end,
                elapsed_refi: size,
            });
            for _ in 1..size {
                epochs.push(RefEpoch {
                    refi: end,
                    elapsed_refi: 0,
                });
            }
            start += size;
        }
        Self {
            mode,
            postpone_limit: limit,
            refi_per_window,
            epochs,
        }
    }

    pub fn mode(&self) -> RefreshMode {
        self.mode
    }

    pub fn postpone_limit(&self) -> u32 {
        self.postpone_limit
    }

    pub fn refi_per_window(&self) -> u32 {
        self.refi_per_window
    }

    pub fn epochs(&self) -> &[RefEpoch] {
        &self.epochs
    }

    /// Number of REF commands issued at the end of each tREFI.
    pub fn refs_per_refi(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.refi_per_window as usize];
        for e in &self.epochs {
            out[e.refi as usize] += 1;
        }
        out
    }
}

fn check_limit(limit: u32) -> Result<()> {
    if limit > MAX_POSTPONE_LIMIT {
        return Err(invalid(format!(
            "postpone limit {limit} exceeds the DDR5 maximum of {MAX_POSTPONE_LIMIT}"
        )));
    }
    Ok(())
}

/// Maximum ACTs that fit between two consecutive REF epochs.
pub fn activation_budget(sched: &RefreshSchedule, max_act: u32) -> u64 {
    let widest = sched.epochs.iter().map(|e| e.elapsed_refi).max().unwrap_or(0);
    widest as u64 * max_act as u64
}

//! Row-Press support: row-open time converted to equivalent activations and
//! a MINT variant whose CAN accumulates them in fixed point.

use crate::error::{invalid, violation, Result};
use crate::trackers::{draw_san, Mitigation, MitigationDecision, RowAddress, SimRng, Tracker};

pub const FRACTION_BITS: u32 = 7;
pub const CAN_BITS: u32 = 14;
/// Raw value of 1.0.
pub const ONE: u32 = 1 << FRACTION_BITS;

/// A row held open for `t_on` ns, followed by `t_pre` ns of precharge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OpenEvent {
    pub row: RowAddress,
    pub t_on: u64,
    pub t_pre: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EactRounding {
    /// Round to nearest, ties to even.
    #[default]
    NearestEven,
    /// Drop the bits below 1/128, as a bare shift would.
    Truncate,
}

fn round_quotient(q: u64, rem: u64, den: u64, mode: EactRounding) -> u64 {
    match mode {
        EactRounding::Truncate => q,
        EactRounding::NearestEven => {
            let twice = 2 * rem;
            if twice > den || (twice == den && q % 2 == 1) {
                q + 1
            } else {
                q
            }
        }
    }
}

/// `(t_on + t_pre) / t_rc` as a raw 7-fractional-bit value.
///
/// A power-of-two `t_rc` divides with a shift; any other value uses exact
/// integer division. Both round the same way.
pub fn eact(t_on: u64, t_pre: u64, t_rc: u64, mode: EactRounding) -> Result<u32> {
    if t_rc == 0 {
        return Err(invalid("tRC must be positive"));
    }
    let num = (t_on + t_pre)
        .checked_mul(ONE as u64)
        .ok_or_else(|| invalid("row-open time too large"))?;
    let raw = if t_rc.is_power_of_two() {
        let shift = t_rc.trailing_zeros();
        let q = num >> shift;
        let rem = num & (t_rc - 1);
        round_quotient(q, rem, t_rc, mode)
    } else {
        round_quotient(num / t_rc, num % t_rc, t_rc, mode)
    };
    u32::try_from(raw).map_err(|_| invalid("EACT does not fit in 32 bits"))
}

/// 14-bit CAN with 7 integer and 7 fractional bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FixedPointCan {
    raw: u32,
}

impl FixedPointCan {
    pub const LIMIT: u32 = 1 << CAN_BITS;

    pub fn raw(&self) -> u32 {
        self.raw
    }

    pub fn value(&self) -> f64 {
        self.raw as f64 / ONE as f64
    }

    pub fn add(&mut self, raw: u32) -> Result<()> {
        let next = self.raw + raw;
        if next >= Self::LIMIT {
            return Err(violation(format!("fixed-point CAN overflow at raw value {next}")));
        }
        self.raw = next;
        Ok(())
    }

    pub fn clear(&mut self) {
        self.raw = 0;
    }
}

/// MINT whose CAN advances by each event's EACT. An event is captured when
/// the accumulated value first reaches SAN.
#[derive(Debug, Clone)]
pub struct MintRowPress {
    slots: u32,
    transitive: bool,
    t_rc: u64,
    rounding: EactRounding,
    san: u32,
    can: FixedPointCan,
    sar: Option<RowAddress>,
    distance: u32,
}

impl MintRowPress {
    pub fn new(slots: u32, transitive: bool, t_rc: u64, rounding: EactRounding, rng: &mut SimRng) -> Result<Self> {
        if slots == 0 || slots >= FixedPointCan::LIMIT / ONE {
            return Err(invalid(format!("Row-Press MINT slots must be in 1..{}", FixedPointCan::LIMIT / ONE)));
        }
        if t_rc == 0 {
            return Err(invalid("tRC must be positive"));
        }
        Ok(Self {
            slots,
            transitive,
            t_rc,
            rounding,
            san: draw_san(rng, slots, transitive),
            can: FixedPointCan::default(),
            sar: None,
            distance: 1,
        })
    }

    pub fn san(&self) -> u32 {
        self.san
    }

    pub fn can(&self) -> FixedPointCan {
        self.can
    }

    pub fn sar(&self) -> Option<RowAddress> {
        self.sar
    }

    pub fn observe_open(&mut self, event: OpenEvent) -> Result<()> {
        let weight = eact(event.t_on, event.t_pre, self.t_rc, self.rounding)?;
        self.observe_weighted(event.row, weight)
    }

    /// Adds a raw EACT for `row`.
    pub fn observe_weighted(&mut self, row: RowAddress, raw: u32) -> Result<()> {
        let before = self.can.raw();
        self.can.add(raw)?;
        let target = self.san * ONE;
        if self.san > 0 && before < target && self.can.raw() >= target {
            self.sar = Some(row);
            self.distance = 1;
        }
        Ok(())
    }
}

impl Tracker for MintRowPress {
    fn name(&self) -> &'static str {
        "mint_rowpress"
    }

    fn observe_activation(&mut self, row: RowAddress, _rng: &mut SimRng) -> Result<()> {
        if self.can.raw() >= self.slots * ONE {
            return Err(violation(format!(
                "Row-Press MINT observed more than {} activations in one interval",
                self.slots
            )));
        }
        self.observe_weighted(row, ONE)
    }

    fn on_refresh(&mut self, rng: &mut SimRng) -> MitigationDecision {
        let decision = self.sar.map(|row| Mitigation {
            row,
            distance: self.distance,
        });
        let san = draw_san(rng, self.slots, self.transitive);
        if san == 0 && self.sar.is_some() {
            self.distance += 1;
        } else {
            self.sar = None;
            self.distance = 1;
        }
        self.san = san;
        self.can.clear();
        decision
    }
}

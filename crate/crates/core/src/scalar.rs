//! Numeric abstraction used by the probability models.
//!
//! The recurrence and Markov models are written once against [`Scalar`] and
//! instantiated with `f64` for production searches, `f32` for cheap sweeps and
//! [`BigRational`] when an exact reference value is wanted.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive};

pub trait Scalar: Num + Clone + PartialOrd + Debug + Send + Sync {
    /// Builds `num / den`; `den` must be non-zero.
    fn from_ratio(num: u64, den: u64) -> Self;

    fn as_f64(&self) -> f64;

    /// `self` raised to a non-negative integer power.
    fn powu(&self, exp: u64) -> Self {
        num_traits::pow::pow(self.clone(), exp as usize)
    }

    fn from_u64(v: u64) -> Self {
        Self::from_ratio(v, 1)
    }

    /// Clamps into the closed unit interval.
    fn clamp_unit(self) -> Self {
        if self < Self::zero() {
            Self::zero()
        } else if self > Self::one() {
            Self::one()
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    fn from_ratio(num: u64, den: u64) -> Self {
        num as f64 / den as f64
    }

    fn as_f64(&self) -> f64 {
        *self
    }

    fn powu(&self, exp: u64) -> Self {
        match i32::try_from(exp) {
            Ok(e) => self.powi(e),
            Err(_) => self.powf(exp as f64),
        }
    }
}

impl Scalar for f32 {
    fn from_ratio(num: u64, den: u64) -> Self {
        (num as f64 / den as f64) as f32
    }

    fn as_f64(&self) -> f64 {
        *self as f64
    }

    fn powu(&self, exp: u64) -> Self {
        match i32::try_from(exp) {
            Ok(e) => self.powi(e),
            Err(_) => self.powf(exp as f32),
        }
    }
}

impl Scalar for BigRational {
    fn from_ratio(num: u64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn as_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_and_power_agree_across_types() {
        let a = f64::from_ratio(72, 73).powu(72);
        let b = f32::from_ratio(72, 73).powu(72);
        let c = BigRational::from_ratio(72, 73).powu(72);
        assert!((a - 0.370_43).abs() < 1e-4);
        assert!((a - b.as_f64()).abs() < 1e-5);
        assert!((a - c.as_f64()).abs() < 1e-14);
    }

    #[test]
    fn clamp_unit_bounds() {
        assert_eq!(1.5f64.clamp_unit(), 1.0);
        assert_eq!((-0.5f64).clamp_unit(), 0.0);
        assert_eq!(0.25f64.clamp_unit(), 0.25);
    }
}

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Failure probabilities `P_k`, k = 1..=k_max, for threshold T and per-activation
/// mitigation probability p.
///
/// `P_k` is the probability that some run of T consecutive activations among
/// the first k went unmitigated:
///
/// * `P_k = 0` for k < T
/// * `P_T = (1-p)^T`
/// * `P_k = p(1-p)^T (1 - P_{k-T-1}) + P_{k-1}` for k > T, with `P_j = 0` for j ≤ 0.
#[derive(Debug, Clone, PartialEq)]
pub struct FailureCurve<S> {
    trh: u64,
    p: S,
    values: Vec<S>,
}

impl<S: Scalar> FailureCurve<S> {
    pub fn trh(&self) -> u64 {
        self.trh
    }

    pub fn p(&self) -> &S {
        &self.p
    }

    pub fn k_max(&self) -> u64 {
        self.values.len() as u64
    }

    /// `P_k`; zero for k = 0.
    pub fn at(&self, k: u64) -> S {
        match k {
            0 => S::zero(),
            _ => self.values[(k - 1) as usize].clone(),
        }
    }

    /// `P_{k_max}`.
    pub fn last(&self) -> S {
        self.values.last().cloned().unwrap_or_else(S::zero)
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }
}

pub const MAX_CURVE_LEN: u64 = 50_000_000;

pub fn failure_curve<S: Scalar>(trh: u64, p: S, k_max: u64) -> Result<FailureCurve<S>> {
    if trh == 0 {
        return Err(invalid("threshold T must be at least 1"));
    }
    if p <= S::zero() || p >= S::one() {
        return Err(invalid(format!("mitigation probability {p:?} must lie in (0, 1)")));
    }
    if k_max > MAX_CURVE_LEN {
        return Err(invalid(format!("k_max {k_max} exceeds {MAX_CURVE_LEN}")));
    }
    let survive_t = (S::one() - p.clone()).powu(trh);
    let hit = p.clone() * survive_t.clone();
    let t = trh as usize;
    let mut values: Vec<S> = Vec::with_capacity(k_max as usize);
    for k in 1..=k_max as usize {
        let v = if k < t {
            S::zero()
        } else if k == t {
            survive_t.clone()
        } else {
            let back = if k > t + 1 { values[k - t - 2].clone() } else { S::zero() };
            hit.clone() * (S::one() - back) + values[k - 2].clone()
        };
        values.push(v);
    }
    Ok(FailureCurve { trh, p, values })
}

/// `P_k` alone, in double precision.
pub fn failure_probability(trh: u64, p: f64, k: u64) -> Result<f64> {
    if k < trh {
        if trh == 0 || !(0.0..1.0).contains(&p) || p == 0.0 {
            return Err(invalid("invalid failure-curve parameters"));
        }
        return Ok(0.0);
    }
    Ok(failure_curve(trh, p, k)?.last())
}

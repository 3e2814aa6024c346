use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Distribution of a row's activation count since its last mitigation, after
/// `t` tREFI with one activation per tREFI and mitigation probability `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovCountDistribution<S> {
    p: S,
    t: u64,
    dist: Vec<S>,
}

impl<S: Scalar> MarkovCountDistribution<S> {
    pub fn p(&self) -> &S {
        &self.p
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn masses(&self) -> &[S] {
        &self.dist
    }

    pub fn mass(&self, a: u64) -> S {
        self.dist.get(a as usize).cloned().unwrap_or_else(S::zero)
    }

    pub fn total(&self) -> S {
        self.dist.iter().cloned().fold(S::zero(), |acc, x| acc + x)
    }

    /// P(A >= a).
    pub fn tail(&self, a: u64) -> S {
        count_tail(self.p.clone(), a, self.t)
    }
}

/// dist(a) = p(1-p)^a for a < t and dist(t) = (1-p)^t.
pub fn markov_distribution<S: Scalar>(p: S, t: u64) -> Result<MarkovCountDistribution<S>> {
    if p <= S::zero() || p >= S::one() {
        return Err(invalid(format!("mitigation probability {p:?} must lie in (0, 1)")));
    }
    let q = S::one() - p.clone();
    let mut dist = Vec::with_capacity(t as usize + 1);
    let mut qa = S::one();
    for _ in 0..t {
        dist.push(p.clone() * qa.clone());
        qa = qa * q.clone();
    }
    dist.push(qa);
    Ok(MarkovCountDistribution { p, t, dist })
}

/// Closed-form P(A >= a) at step t: `(1-p)^a` for a ≤ t, zero beyond.
pub fn count_tail<S: Scalar>(p: S, a: u64, t: u64) -> S {
    if a > t {
        S::zero()
    } else {
        (S::one() - p).powu(a)
    }
}

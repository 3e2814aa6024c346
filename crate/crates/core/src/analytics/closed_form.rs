use crate::error::{invalid, Result};
use crate::scalar::Scalar;

fn check_probability<S: Scalar>(p: &S) -> Result<()> {
    if *p < S::zero() || *p > S::one() {
        return Err(invalid(format!("probability {p:?} outside [0, 1]")));
    }
    Ok(())
}

/// Probability that a row sampled at position `k` of `m` survives the
/// remaining `m - k` sampling attempts: `(1-p)^(m-k)`.
pub fn survival_probability<S: Scalar>(p: S, m: u64, k: u64) -> Result<S> {
    check_probability(&p)?;
    if k == 0 || k > m {
        return Err(invalid(format!("position {k} outside 1..={m}")));
    }
    Ok((S::one() - p).powu(m - k))
}

/// No-overwrite sampling lands on position `k` with probability `p(1-p)^(k-1)`.
pub fn nooverwrite_sampling<S: Scalar>(p: S, k: u64) -> Result<S> {
    check_probability(&p)?;
    if k == 0 {
        return Err(invalid("positions are numbered from 1"));
    }
    Ok(p.clone() * (S::one() - p).powu(k - 1))
}

/// Probability that none of `m` activations is sampled: `(1-p)^m`.
pub fn nonselection_probability<S: Scalar>(p: S, m: u64) -> Result<S> {
    check_probability(&p)?;
    Ok((S::one() - p).powu(m))
}

/// Probability that the activation at position `k` is sampled and survives to REF.
pub fn para_effective_p<S: Scalar>(p: S, m: u64, k: u64) -> Result<S> {
    let s = survival_probability(p.clone(), m, k)?;
    Ok(p * s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Exact;

    const P: f64 = 1.0 / 73.0;

    #[test]
    fn survival_examples() {
        let s1 = survival_probability(P, 73, 1).unwrap();
        assert!((s1 - 0.3704).abs() < 5e-5);
        assert_eq!(survival_probability(P, 73, 73).unwrap(), 1.0);
        assert_eq!(survival_probability(0.5, 2, 1).unwrap(), 0.5);
        assert!(survival_probability(P, 73, 0).is_err());
        assert!(survival_probability(P, 73, 74).is_err());
    }

    #[test]
    fn nooverwrite_examples() {
        assert!((nooverwrite_sampling(P, 1).unwrap() - P).abs() < 1e-15);
        let last = nooverwrite_sampling(P, 73).unwrap();
        assert!((1.0 / last - 197.0).abs() < 1.0, "{}", 1.0 / last);
        assert_eq!(nooverwrite_sampling(1.0, 1).unwrap(), 1.0);
    }

    #[test]
    fn nonselection_examples() {
        assert!((nonselection_probability(P, 73).unwrap() - 0.3654).abs() < 1e-4);
        assert_eq!(nonselection_probability(1.0, 1).unwrap(), 0.0);
        assert_eq!(nonselection_probability(0.0, 10).unwrap(), 1.0);
    }

    #[test]
    fn effective_p_examples() {
        let worst = para_effective_p(P, 73, 1).unwrap();
        assert!((worst - 0.005074).abs() < 5e-7);
        assert!((para_effective_p(P, 73, 73).unwrap() - P).abs() < 1e-15);
        assert!((P / worst - 2.70).abs() < 0.01);
    }

    #[test]
    fn worst_position_penalty_is_shared_by_both_variants() {
        let p = Exact::from_ratio(1, 73);
        let ow = para_effective_p(p.clone(), 73, 1).unwrap();
        let no = nooverwrite_sampling(p.clone(), 73).unwrap();
        assert_eq!(ow, no);
        assert_eq!(ow / p.clone(), (Exact::from_ratio(72, 73)).powu(72));
    }
}

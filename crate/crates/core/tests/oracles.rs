//! Independent oracles for analytical quantities.

use rand::SeedableRng;
use trhsim_core::analytics::{count_tail, feinting_limit, markov_distribution, para_effective_p};
use trhsim_core::trackers::{run_cycle, InDramPara, OverwritePolicy, RowAddress, SimRng};
use trhsim_core::Exact;

fn ratio(n: i64, d: i64) -> Exact {
    Exact::new(n.into(), d.into())
}

/// Count after `t` steps of the chain "mitigated to 0 with p, else +1",
/// by repeated multiplication with the transition matrix.
fn chain_distribution(p: &Exact, t: usize) -> Vec<Exact> {
    let zero = ratio(0, 1);
    let q = ratio(1, 1) - p;
    let states = t + 1;
    let mut matrix = vec![vec![zero.clone(); states]; states];
    for (from, row) in matrix.iter_mut().enumerate() {
        row[0] = p.clone();
        let up = (from + 1).min(t);
        row[up] = &row[up] + &q;
    }
    let mut v = vec![zero.clone(); states];
    v[0] = ratio(1, 1);
    for _ in 0..t {
        let mut next = vec![zero.clone(); states];
        for (from, mass) in v.iter().enumerate() {
            for (to, w) in matrix[from].iter().enumerate() {
                next[to] = &next[to] + mass * w;
            }
        }
        v = next;
    }
    v
}

/// f64 matrix power by repeated squaring, as a cross-check of the exact stepping.
fn chain_distribution_squaring(p: f64, t: usize) -> Vec<f64> {
    let n = t + 1;
    let mul = |a: &Vec<Vec<f64>>, b: &Vec<Vec<f64>>| {
        let mut c = vec![vec![0.0; n]; n];
        for i in 0..n {
            for k in 0..n {
                for j in 0..n {
                    c[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        c
    };
    let mut base = vec![vec![0.0; n]; n];
    for (from, row) in base.iter_mut().enumerate() {
        row[0] += p;
        row[(from + 1).min(t)] += 1.0 - p;
    }
    let mut acc: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| (i == j) as u8 as f64).collect()).collect();
    let mut e = t;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(&acc, &base);
        }
        base = mul(&base, &base);
        e >>= 1;
    }
    acc[0].clone()
}

#[test]
fn markov_distribution_matches_transition_matrix() {
    for p in [ratio(1, 2), ratio(1, 73), ratio(3, 10)] {
        for t in [1usize, 2, 5, 17, 64] {
            let dist = markov_distribution(p.clone(), t as u64).unwrap();
            let chain = chain_distribution(&p, t);
            assert_eq!(dist.masses(), &chain[..], "p={p} t={t}");
            assert_eq!(dist.total(), ratio(1, 1));
            for a in 0..=t as u64 + 1 {
                let tail: Exact = chain.iter().skip(a as usize).fold(ratio(0, 1), |s, x| s + x);
                assert_eq!(count_tail(p.clone(), a, t as u64), tail, "tail a={a}");
            }
        }
    }
}

#[test]
fn exact_chain_agrees_with_matrix_squaring() {
    for t in [3usize, 64] {
        let exact = chain_distribution(&ratio(1, 73), t);
        let fast = chain_distribution_squaring(1.0 / 73.0, t);
        for (e, f) in exact.iter().zip(&fast) {
            let e = e.numer().to_string().parse::<f64>().unwrap() / e.denom().to_string().parse::<f64>().unwrap();
            assert!((e - f).abs() < 1e-12);
        }
    }
}

/// Largest victim hammers the attacker can force: every round it spreads `m`
/// ACTs over the surviving rows in any way, then the tracker removes a row
/// with the highest count. Returns the best total on the final two rows.
fn feinting_search(counts: &mut Vec<u64>, m: u64) -> u64 {
    let mut best = 0;
    distribute(counts, 0, m, m, &mut best);
    best
}

fn distribute(counts: &mut Vec<u64>, from: usize, left: u64, m: u64, best: &mut u64) {
    if from + 1 == counts.len() {
        counts[from] += left;
        let value = if counts.len() == 2 {
            counts[0] + counts[1]
        } else {
            let mut rest = counts.clone();
            rest.sort_unstable();
            rest.pop();
            feinting_search(&mut rest, m)
        };
        *best = (*best).max(value);
        counts[from] -= left;
        return;
    }
    for give in 0..=left {
        counts[from] += give;
        distribute(counts, from + 1, left - give, m, best);
        counts[from] -= give;
    }
}

#[test]
fn feinting_limit_matches_exhaustive_search() {
    for (m, n) in [(2u64, 2u64), (1, 2), (3, 2), (1, 3), (2, 3), (3, 3), (2, 4), (3, 4), (4, 4), (2, 5)] {
        let got = feinting_limit(m, n).unwrap().victim_hammers();
        let best = feinting_search(&mut vec![0; n as usize], m);
        assert_eq!(got, best, "M={m} N={n}");
    }
}

#[test]
fn para_worst_position_rate_by_simulation() {
    let mut rng = SimRng::seed_from_u64(507);
    let mut para = InDramPara::new(1, 73, OverwritePolicy::Overwrite, 73).unwrap();
    let target = RowAddress::new(1).unwrap();
    let acts: Vec<RowAddress> = std::iter::once(target)
        .chain((0..72).map(|i| RowAddress::new(1000 + i).unwrap()))
        .collect();
    let trials = 1_000_000u64;
    let mut hits = 0u64;
    for _ in 0..trials {
        if run_cycle(&mut para, &acts, &mut rng).unwrap().map(|d| d.row) == Some(target) {
            hits += 1;
        }
    }
    let p = para_effective_p(1.0f64 / 73.0, 73, 1).unwrap();
    assert!((p - 0.00507).abs() < 5e-5);
    let sd = (trials as f64 * p * (1.0 - p)).sqrt();
    assert!((hits as f64 - trials as f64 * p).abs() <= 3.0 * sd, "{hits}");
}

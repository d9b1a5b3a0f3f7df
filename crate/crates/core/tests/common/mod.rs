//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{Float, One, Signed, Zero};
use resilient_consensus::graph::Digraph;
use resilient_consensus::plant::{AttackProfile, ScalarSignal};
use resilient_consensus::scenario::{four_agent_benchmark, Scenario};

/// Determinant by full permutation expansion, exact over the integers.
pub fn det_brute(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = BigInt::zero();
    permute(&mut perm, 0, &mut |p| {
        let mut inversions = 0;
        for i in 0..n {
            for j in i + 1..n {
                if p[i] > p[j] {
                    inversions += 1;
                }
            }
        }
        let term = (0..n).fold(BigInt::one(), |acc, i| acc * &m[i][p[i]]);
        if inversions % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    });
    total
}

fn permute(p: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, f);
        p.swap(k, i);
    }
}

/// Every f64 is `±m·2^e`; scaling all of them by a shared power of two gives exact integers.
fn to_integers(values: &[f64]) -> Vec<BigInt> {
    let parts: Vec<(u64, i16, i8)> = values.iter().map(|v| v.integer_decode()).collect();
    let floor = parts.iter().filter(|p| p.0 != 0).map(|p| p.1).min().unwrap_or(0);
    parts.iter().map(|&(m, e, sign)| (BigInt::from(m) << (e - floor) as usize) * BigInt::from(sign)).collect()
}

/// Number of eigenvalues of symmetric `q` strictly below `mu`, from the signs of the leading
/// principal minors of `q − μI` (Sylvester inertia). Entries and shift are taken exactly, so the
/// minor signs are exact. Returns `None` when a minor vanishes.
pub fn count_below(q: &[Vec<f64>], mu: f64) -> Option<usize> {
    let n = q.len();
    let mut flat: Vec<f64> = q.iter().flatten().copied().collect();
    flat.push(mu);
    let ints = to_integers(&flat);
    let mu = &ints[n * n];
    let shifted: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { &ints[i * n + j] - mu } else { ints[i * n + j].clone() }).collect())
        .collect();
    let mut prev_positive = true;
    let mut negatives = 0;
    for k in 1..=n {
        let minor: Vec<Vec<BigInt>> = shifted[..k].iter().map(|r| r[..k].to_vec()).collect();
        let d = det_brute(&minor);
        if d.is_zero() {
            return None;
        }
        if d.is_positive() != prev_positive {
            negatives += 1;
        }
        prev_positive = d.is_positive();
    }
    Some(negatives)
}

/// The `k`-th smallest eigenvalue (0-based) of a small symmetric matrix by bisection on
/// [`count_below`], within `[lo, hi]`.
pub fn kth_eigenvalue(q: &[Vec<f64>], k: usize, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        if hi - lo < 1e-13 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        // A zero minor only happens at isolated shifts; step just off it.
        let count = [0.0, 1e-14, -1e-14, 1e-12, -1e-12]
            .iter()
            .find_map(|n| count_below(q, mid + n * std::f64::consts::PI))
            .unwrap_or_else(|| panic!("no usable shift near {mid}"));
        if count > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Every labelled digraph on `n` nodes without self-loops.
pub fn all_digraphs(n: usize) -> Vec<Digraph> {
    let pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    (0u32..1 << pairs.len())
        .map(|mask| {
            let edges: Vec<_> = pairs.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &e)| e).collect();
            Digraph::from_edges(n, &edges).expect("valid edges")
        })
        .collect()
}

/// Benchmark dynamics replaced by double integrators whose control coefficients are all −1,
/// with no attacks, so every Nussbaum gain starts in the stabilizing direction.
pub fn aligned_directions() -> Scenario<f64> {
    let mut sc = four_agent_benchmark::<f64>();
    sc.name = "aligned-directions".into();
    sc.attacks = AttackProfile::identity(4);
    for a in sc.agents.iter_mut() {
        a.initial.x1 = a.initial.s;
        a.initial.x2 = 0.0;
        a.model.theta1 = vec![0.0];
        a.model.theta2 = vec![0.0];
        a.model.g1 = ScalarSignal::constant(-1.0);
        a.model.g2 = ScalarSignal::constant(-1.0);
        a.model.o1 = ScalarSignal::constant(0.0);
        a.model.o2 = ScalarSignal::constant(0.0);
    }
    sc
}

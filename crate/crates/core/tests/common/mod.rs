//! Independent reference computations used only by the tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use schmidt_core::SchmidtState;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn st(w: &[f64]) -> SchmidtState {
    SchmidtState::new(w.to_vec()).unwrap()
}

/// Random normalized weights with exactly `rank` positive entries, bounded
/// away from zero.
pub fn random_dist(rng: &mut ChaCha8Rng, rank: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..rank).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

pub fn random_state(rng: &mut ChaCha8Rng, rank: usize) -> SchmidtState {
    st(&random_dist(rng, rank))
}

/// Random state with rank drawn uniformly from `lo..=hi`.
pub fn random_state_ranked(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> SchmidtState {
    let rank = rng.gen_range(lo..=hi);
    random_state(rng, rank)
}

/// All set partitions of `0..n`.
pub fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in set_partitions(n - 1) {
        for i in 0..p.len() {
            let mut q = p.clone();
            q[i].push(n - 1);
            out.push(q);
        }
        let mut q = p.clone();
        q.push(vec![n - 1]);
        out.push(q);
    }
    out
}

/// Exact `max_{P'} F((t ⊗ P')↓, q↓)`.
///
/// Group the seed weights by the ancilla column their cell lies in. A column
/// holding the set `B` pairs its members, in decreasing order, with
/// `t_0, t_1, …`; for a fixed grouping Cauchy–Schwarz over the column
/// weights gives `Σ_B (Σ_r √(q_{B_r} t_r))²`. Sorting can only improve on
/// any fixed grouping, and the grouping read off the sorted optimum is one
/// of the candidates, so the maximum over groupings is the optimum.
pub fn exact_losr(target: &[f64], seed: &[f64]) -> f64 {
    let t: Vec<f64> = sorted_support(target);
    let q: Vec<f64> = sorted_support(seed);
    let mut best: f64 = 0.0;
    for p in set_partitions(q.len()) {
        if p.iter().any(|b| b.len() > t.len()) {
            continue;
        }
        let v: f64 = p
            .iter()
            .map(|b| {
                let mut b = b.clone();
                b.sort();
                let s: f64 = b.iter().zip(&t).map(|(&k, &tr)| (q[k] * tr).sqrt()).sum();
                s * s
            })
            .sum();
        best = best.max(v);
    }
    best
}

pub fn sorted_support(w: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = w.iter().copied().filter(|&x| x > 0.0).collect();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v
}

/// `Δ_ε` by trying every subset.
pub fn delta_bruteforce(p: &[f64], eps: f64) -> f64 {
    let d = p.len();
    let total: f64 = p.iter().sum();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << d) {
        let mut mass = 0.0;
        let mut count = 0;
        let mut mx: f64 = 0.0;
        for (i, &x) in p.iter().enumerate() {
            if mask & (1 << i) != 0 {
                mass += x;
                count += 1;
                mx = mx.max(x);
            }
        }
        if mass >= (1.0 - eps) * total - 1e-12 && mx > 0.0 {
            best = best.min(count as f64 * mx);
        }
    }
    best.log2()
}

/// Exact dilution optimum `K^{-1} max Σ_j S(m_j)²` over integer partitions
/// `(m_j)` of `K` with parts at most `rank`, where `S(m) = Σ_{r<m} √t_r`.
/// This is [`exact_losr`] specialized to a uniform seed of rank `K`.
pub fn exact_dilution(target: &[f64], k: usize) -> f64 {
    let t = sorted_support(target);
    let s: Vec<f64> = (0..=t.len())
        .map(|m| t[..m].iter().map(|x| x.sqrt()).sum())
        .collect();
    fn walk(s: &[f64], rem: usize, max_part: usize, acc: f64, best: &mut f64) {
        if rem == 0 {
            *best = best.max(acc);
            return;
        }
        for m in 1..=max_part.min(rem) {
            walk(s, rem - m, m, acc + s[m] * s[m], best);
        }
    }
    let mut best = 0.0;
    walk(&s, k, t.len(), 0.0, &mut best);
    best / k as f64
}

/// `F_LU` of `n` copies of two-qubit states by building both `2^n`-entry
/// vectors and sorting them.
pub fn explicit_two_qubit_iid(p: f64, q: f64, n: usize) -> f64 {
    let power = |x: f64| {
        let mut v = vec![1.0];
        for _ in 0..n {
            v = v.iter().flat_map(|&a| [a * x, a * (1.0 - x)]).collect();
        }
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        v
    };
    let (a, b) = (power(p), power(q));
    let bc: f64 = a.iter().zip(&b).map(|(x, y)| (x * y).sqrt()).sum();
    bc * bc
}

/// Factorizable pair `(target, target ⊗ ζ)` with random ranks.
pub fn factorizable(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (rt, rz) = (rng.gen_range(2..=3), rng.gen_range(1..=3));
    let t = random_dist(rng, rt);
    let z = random_dist(rng, rz);
    let seed: Vec<f64> = t.iter().flat_map(|&a| z.iter().map(move |&b| a * b)).collect();
    (t, z, seed)
}

/// Moves mass into the largest seed weight until it exceeds the target's
/// largest weight by `δ`. No ancilla can raise the target's largest weight,
/// so coarse-graining both sides to (largest, rest) bounds the fidelity by
/// `F((p, 1-p), (p+δ, 1-p-δ))`, returned as the second value.
pub fn perturbed_seed(rng: &mut ChaCha8Rng, target: &[f64], seed: &[f64]) -> (Vec<f64>, f64) {
    let p = target.iter().copied().fold(0.0, f64::max);
    let delta = rng.gen_range(0.02..0.1f64).min((1.0 - p) / 2.0);
    let mut s = sorted_support(seed);
    let top = p + delta;
    let rest: f64 = s[1..].iter().sum();
    let scale = (1.0 - top) / rest;
    s[0] = top;
    for x in &mut s[1..] {
        *x *= scale;
    }
    let bound = ((p * top).sqrt() + ((1.0 - p) * (1.0 - top)).sqrt()).powi(2);
    (s, bound)
}

//! Embezzling states and catalysts.
//!
//! The harmonic family `w_j = 1/(j H_n)` embezzles any `m`-level state with
//! fidelity at least `1 - log m / log n`. For fixed small catalysts the best
//! catalytic LU conversion `max_R F((P ⊗ R)↓, (Q ⊗ R)↓)` is found by grid
//! search.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{OrderedGrid, DEFAULT_BUDGET};
use crate::losr::{objective_slices, refine};
use crate::simplex::{bc_slices, sort_desc_in_place, tensor_slices, ProbVector, SchmidtState, SortedProbVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HarmonicState {
    pub n: usize,
    /// `H_n = Σ_{i=1}^n 1/i`.
    pub harmonic_number: f64,
}

impl HarmonicState {
    /// Weight of level `j` (1-based).
    pub fn weight(&self, j: usize) -> f64 {
        1.0 / (j as f64 * self.harmonic_number)
    }

    pub fn dist(&self) -> SortedProbVector {
        let w = (1..=self.n).map(|j| self.weight(j)).collect();
        SortedProbVector::from_sorted(w).expect("harmonic weights are sorted")
    }
}

pub fn harmonic_dist(n: usize) -> Result<HarmonicState> {
    if n == 0 {
        return Err(Error::range("n", 0.0, ">= 1"));
    }
    // Summed smallest first for accuracy.
    let h = (1..=n).rev().map(|i| 1.0 / i as f64).sum();
    Ok(HarmonicState {
        n,
        harmonic_number: h,
    })
}

/// Entry of the k-way merge: value `t_i / j` of row `i`.
struct Cell {
    value: f64,
    row: usize,
    j: usize,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then(other.row.cmp(&self.row))
    }
}

/// Fidelity of embezzling `target` out of the `n`-level harmonic state, for
/// every `n = 1..=n_max`.
///
/// The overlap `√F` is at least `1 - log m / log n` for an `m`-level
/// target; the squared fidelity itself can be slightly lower (uniform
/// two-level targets drop below that line from `n = 334`).
///
/// The `n` largest entries of `harmonic_n ⊗ target` are the `n` largest
/// values `t_i / j` (over all `j >= 1`) divided by `H_n`: row 0 alone already
/// supplies `n` values of at least `t_0 / n`, and every value with `j > n` is
/// smaller. With `u` those values in decreasing order,
/// `F(n) = (Σ_{k<n} √(u_k / (k+1)))² / H_n²`.
pub fn randomness_embezzle_curve(target: &ProbVector, n_max: usize) -> Result<Vec<f64>> {
    if n_max == 0 {
        return Err(Error::range("n", 0.0, ">= 1"));
    }
    let t = crate::simplex::sort_desc(&target.normalized());
    let t: Vec<f64> = t.weights().iter().copied().filter(|&x| x > 0.0).collect();
    let mut heap: BinaryHeap<Cell> = t
        .iter()
        .enumerate()
        .map(|(row, &v)| Cell { value: v, row, j: 1 })
        .collect();
    let mut out = Vec::with_capacity(n_max);
    let mut s = 0.0;
    let mut h = 0.0;
    for k in 0..n_max {
        let c = heap.pop().expect("rows are unbounded");
        s += (c.value / (k + 1) as f64).sqrt();
        h += 1.0 / (k + 1) as f64;
        out.push((s / h).powi(2));
        heap.push(Cell {
            value: t[c.row] / (c.j + 1) as f64,
            row: c.row,
            j: c.j + 1,
        });
    }
    Ok(out)
}

/// Fidelity of embezzling `target` out of the `n`-level harmonic state.
pub fn randomness_embezzle_fidelity(target: &ProbVector, n: usize) -> Result<f64> {
    Ok(*randomness_embezzle_curve(target, n)?.last().expect("n >= 1"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VdhRank {
    /// Smallest `n > m^{1/ε}`, when it fits below `2^53`.
    pub rank: Option<u64>,
    pub log10_rank: f64,
    pub overflow: bool,
}

/// Smallest harmonic-state size `n > m^{1/ε}` guaranteeing fidelity
/// `1 - ε` for every `m`-level target.
pub fn vdh_required_rank(m: usize, eps: f64) -> Result<VdhRank> {
    if m < 2 {
        return Err(Error::range("m", m as f64, ">= 2"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::range("eps", eps, "0 < eps < 1"));
    }
    let inv = 1.0 / eps;
    let log10_bound = (m as f64).log10() * inv;
    let limit = 2f64.powi(53);
    let int_pow = (inv - inv.round()).abs() < 1e-9;
    let exact = if int_pow {
        (m as u64)
            .checked_pow(inv.round() as u32)
            .filter(|&v| (v as f64) < limit)
            .map(|v| v + 1)
    } else {
        let b = (m as f64).powf(inv);
        (b < limit).then(|| b.floor() as u64 + 1)
    };
    Ok(VdhRank {
        rank: exact,
        log10_rank: exact.map_or(log10_bound, |r| (r as f64).log10()),
        overflow: exact.is_none(),
    })
}

/// `log10(2^{1/(1-F)})`: decimal order of the harmonic state needed to
/// embezzle a qubit with fidelity `F`.
pub fn vdh_order_for_fidelity(f: f64) -> Result<f64> {
    if !(f > 0.0 && f < 1.0) {
        return Err(Error::range("fidelity", f, "0 < F < 1"));
    }
    Ok(std::f64::consts::LOG10_2 / (1.0 - f))
}

/// `F((target ⊗ catalyst)↓, (seed ⊗ catalyst)↓)`.
pub fn embezzler_objective(target: &SchmidtState, seed: &SchmidtState, catalyst: &ProbVector) -> f64 {
    let r = catalyst.weights();
    let mut a = tensor_slices(target.support_weights(), r);
    let mut b = tensor_slices(seed.support_weights(), r);
    sort_desc_in_place(&mut a);
    sort_desc_in_place(&mut b);
    let bc = bc_slices(&a, &b);
    bc * bc
}

thread_local! {
    static BUFS: RefCell<(Vec<f64>, Vec<f64>)> = const { RefCell::new((Vec::new(), Vec::new())) };
}

fn objective_fast(t: &[f64], q: &[f64], r: &[f64]) -> f64 {
    BUFS.with(|cell| {
        let (a, b) = &mut *cell.borrow_mut();
        a.clear();
        b.clear();
        for &ti in t {
            a.extend(r.iter().map(|&x| ti * x));
        }
        for &qi in q {
            b.extend(r.iter().map(|&x| qi * x));
        }
        sort_desc_in_place(a);
        sort_desc_in_place(b);
        let bc = bc_slices(a, b);
        bc * bc
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbezzlerSearchResult {
    pub catalyst: SortedProbVector,
    pub fidelity: f64,
    pub grid_step: f64,
    /// Whether the nesting cap restricted the search.
    pub heuristic_capped: bool,
}

/// Grid search for the best `dim`-level catalyst under local unitaries.
///
/// With `nesting_cap` (the optimizer found at `dim - 1`), the largest
/// catalyst weight is bounded by the largest weight of that optimizer. This
/// is a heuristic that keeps dimensions 7 and 8 cheap; the previous optimizer
/// padded with a zero stays admissible, so the optimum never decreases with
/// `dim`.
pub fn embezzler_search_lu(
    target: &SchmidtState,
    seed: &SchmidtState,
    dim: usize,
    step: f64,
    nesting_cap: Option<&SortedProbVector>,
) -> Result<EmbezzlerSearchResult> {
    let mut grid = OrderedGrid::new(dim, step)?;
    if let Some(cap) = nesting_cap {
        grid = grid.with_caps(&[cap.max()]);
    }
    let (t, q) = (target.support_weights(), seed.support_weights());
    let best = grid.search(DEFAULT_BUDGET, |r| objective_fast(t, q, r))?;
    let catalyst = SortedProbVector::from_sorted(best.point)?;
    Ok(EmbezzlerSearchResult {
        fidelity: embezzler_objective(target, seed, catalyst.as_prob()),
        catalyst,
        grid_step: grid.step(),
        heuristic_capped: grid.is_capped(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbezzleLosrOptions {
    pub step: f64,
    pub rounds: usize,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for EmbezzleLosrOptions {
    fn default() -> Self {
        EmbezzleLosrOptions {
            step: 0.005,
            rounds: 20,
            max_iters: 500,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbezzlerLosrResult {
    pub catalyst: SortedProbVector,
    /// Ancilla appended on the target side.
    pub ancilla: ProbVector,
    pub fidelity: f64,
    /// Value of the LU catalyst search the alternation starts from.
    pub lu_fidelity: f64,
    pub grid_step: f64,
    pub rounds: usize,
}

/// `max_{R, P'} F((P ⊗ P')↓, (Q ⊗ R)↓)` by alternating maximization.
///
/// Starts from the LU catalyst `R` with `P' = R`, which reproduces the LU
/// value. Each round improves `P'` for fixed `R` by pattern-wise ascent and
/// then re-searches the `R` grid for fixed `P'`; a round is kept only if it
/// improves, so the result never falls below the LU search.
pub fn embezzler_search_losr(
    target: &SchmidtState,
    seed: &SchmidtState,
    dim: usize,
    opts: &EmbezzleLosrOptions,
) -> Result<EmbezzlerLosrResult> {
    let lu = embezzler_search_lu(target, seed, dim, opts.step, None)?;
    let t = target.support_weights();
    let q = seed.support_weights();
    let seed_side = |r: &[f64]| {
        let mut b: Vec<f64> = tensor_slices(q, r).into_iter().filter(|&x| x > 0.0).collect();
        sort_desc_in_place(&mut b);
        b
    };
    let mut r: Vec<f64> = lu.catalyst.weights().to_vec();
    let mut x: Vec<f64> = r.iter().copied().filter(|&v| v > 0.0).collect();
    let mut best = lu.fidelity;
    let mut buf = Vec::new();
    let mut rounds = 0;
    let grid = OrderedGrid::new(dim, opts.step)?;
    for _ in 0..opts.rounds {
        rounds += 1;
        // Ancilla step.
        let b = seed_side(&r);
        let mut x0 = x.clone();
        x0.resize(b.len().max(x0.len()), 0.0);
        x0.truncate(b.len());
        let (vx, nx) = refine(t, &b, &x0, opts.max_iters, opts.tol);
        let mut improved = false;
        if vx > best + opts.tol {
            best = vx;
            x = nx;
            improved = true;
        }
        // Catalyst step.
        let mut a = tensor_slices(t, &x);
        sort_desc_in_place(&mut a);
        let found = grid.search(DEFAULT_BUDGET, |rr| {
            let b = seed_side(rr);
            let bc = bc_slices(&a, &b);
            bc * bc
        })?;
        if found.value > best + opts.tol {
            best = found.value;
            r = found.point;
            improved = true;
        }
        if !improved {
            break;
        }
    }
    let b = seed_side(&r);
    let fidelity = objective_slices(t, &b, &x, &mut buf);
    Ok(EmbezzlerLosrResult {
        catalyst: SortedProbVector::from_sorted(r)?,
        ancilla: ProbVector::new(x)?,
        fidelity,
        lu_fidelity: lu.fidelity,
        grid_step: grid.step(),
        rounds,
    })
}

/// One row of the catalyst sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig5Row {
    pub p: f64,
    pub q: f64,
    pub dim: usize,
    pub fidelity: f64,
    /// `log10` of the harmonic-state size matching `fidelity`; absent when
    /// the fidelity is 1.
    pub vdh_order: Option<f64>,
    pub catalyst: SortedProbVector,
    pub heuristic_capped: bool,
}

/// Dimension from which the nesting heuristic caps the catalyst search.
pub const NESTING_FROM_DIM: usize = 7;

/// Catalyst search over two-qubit pairs `(p, q)` (target, seed) and catalyst
/// dimensions, with the nesting cap from [`NESTING_FROM_DIM`] on.
pub fn fig5_sweep(pairs: &[(f64, f64)], dims: &[usize], step: f64) -> Result<Vec<Fig5Row>> {
    let max_dim = dims.iter().copied().max().unwrap_or(0);
    let mut rows = Vec::new();
    for &(p, q) in pairs {
        let target = two_qubit(p)?;
        let seed = two_qubit(q)?;
        let mut prev: Option<SortedProbVector> = None;
        for dim in 1..=max_dim {
            let cap = if dim >= NESTING_FROM_DIM { prev.as_ref() } else { None };
            let r = embezzler_search_lu(&target, &seed, dim, step, cap)?;
            if dims.contains(&dim) {
                rows.push(Fig5Row {
                    p,
                    q,
                    dim,
                    fidelity: r.fidelity,
                    vdh_order: vdh_order_for_fidelity(r.fidelity).ok(),
                    catalyst: r.catalyst.clone(),
                    heuristic_capped: r.heuristic_capped,
                });
            }
            prev = Some(r.catalyst);
        }
    }
    Ok(rows)
}

/// The two-qubit state with squared Schmidt coefficients `(p, 1 - p)`.
pub fn two_qubit(p: f64) -> Result<SchmidtState> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::range("p", p, "0 <= p <= 1"));
    }
    SchmidtState::new(vec![p, 1.0 - p])
}

/// Reference catalysts: near-optimal catalysts found by a 0.005 grid search
/// for six two-qubit pairs, dimensions 2 to 8.
pub mod reference {
    use super::*;

    #[derive(Debug, Clone, PartialEq)]
    pub struct CatalystTable {
        pub p: f64,
        pub q: f64,
        pub rows: Vec<(usize, SortedProbVector)>,
    }

    const TABLES: [(f64, f64, &str); 6] = [
        (0.5, 0.55, include_str!("../data/catalysts/p0.5_q0.55.csv")),
        (0.5, 0.6, include_str!("../data/catalysts/p0.5_q0.6.csv")),
        (0.5, 0.7, include_str!("../data/catalysts/p0.5_q0.7.csv")),
        (0.6, 0.65, include_str!("../data/catalysts/p0.6_q0.65.csv")),
        (0.6, 0.7, include_str!("../data/catalysts/p0.6_q0.7.csv")),
        (0.6, 0.8, include_str!("../data/catalysts/p0.6_q0.8.csv")),
    ];

    pub fn tables() -> Vec<CatalystTable> {
        TABLES
            .iter()
            .map(|&(p, q, text)| CatalystTable {
                p,
                q,
                rows: parse_table(text).expect("bundled tables are valid"),
            })
            .collect()
    }

    /// Parses `dim,w1,...,w_dim` lines (any order of weights); blank lines
    /// and `#` comments are skipped.
    pub fn parse_table(text: &str) -> Result<Vec<(usize, SortedProbVector)>> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |what: &str| Error::Domain(format!("line {}: {what}", lineno + 1));
            let mut fields = line.split(',').map(str::trim);
            let dim: usize = fields
                .next()
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| bad("expected a dimension"))?;
            let weights: Vec<f64> = fields
                .map(|f| f.parse::<f64>().map_err(|_| bad("invalid weight")))
                .collect::<Result<_>>()?;
            if weights.len() != dim {
                return Err(bad("weight count does not match the dimension"));
            }
            rows.push((dim, SortedProbVector::sorting(weights)?));
        }
        Ok(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lu::f_lu;

    fn pv(w: &[f64]) -> ProbVector {
        ProbVector::new(w.to_vec()).unwrap()
    }

    #[test]
    fn harmonic_examples() {
        assert_eq!(harmonic_dist(1).unwrap().dist().weights(), &[1.0]);
        let h = harmonic_dist(2).unwrap().dist();
        assert!((h.weights()[0] - 2.0 / 3.0).abs() < 1e-15);
        let h = harmonic_dist(4).unwrap().dist();
        for (a, b) in h.weights().iter().zip([0.48, 0.24, 0.16, 0.12]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(harmonic_dist(0).is_err());
    }

    #[test]
    fn randomness_embezzling_matches_explicit_product() {
        let t = pv(&[0.5, 0.3, 0.2]);
        for n in [1, 2, 5, 17, 40] {
            let h = harmonic_dist(n).unwrap().dist();
            let mut z = crate::simplex::tensor(h.as_prob(), &t).into_weights();
            sort_desc_in_place(&mut z);
            let bc = bc_slices(&z[..n], h.weights());
            let got = randomness_embezzle_fidelity(&t, n).unwrap();
            assert!((got - bc * bc).abs() < 1e-13, "n {n}: {got} vs {}", bc * bc);
        }
        assert!((randomness_embezzle_fidelity(&pv(&[1.0]), 7).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn randomness_embezzling_rank_rule() {
        // n > m^{1/ε} guarantees overlap √F >= 1 - ε; the squared fidelity
        // can fall below 1 - ε (0.9462 here).
        let n = 2f64.powf(1.0 / 0.05).ceil() as usize;
        let f = randomness_embezzle_fidelity(&pv(&[0.5, 0.5]), n).unwrap();
        assert!(f.sqrt() >= 0.95);
        assert!((f - 0.946182).abs() < 1e-6, "{f}");
    }

    #[test]
    fn vdh_examples() {
        let r = vdh_required_rank(2, 0.021).unwrap();
        assert!((r.log10_rank - 14.33).abs() < 0.01);
        assert_eq!(vdh_required_rank(2, 0.5).unwrap().rank, Some(5));
        assert_eq!(vdh_required_rank(3, 0.25).unwrap().rank, Some(82));
        let big = vdh_required_rank(2, 0.001).unwrap();
        assert!(big.overflow && big.rank.is_none() && (big.log10_rank - 301.03).abs() < 0.01);
        assert!(vdh_required_rank(2, 1.0).is_err());
        assert!((vdh_order_for_fidelity(0.5).unwrap() - 0.60206).abs() < 1e-5);
        assert!((vdh_order_for_fidelity(0.979).unwrap() - 14.335).abs() < 1e-3);
        assert!((vdh_order_for_fidelity(0.9).unwrap() - 3.0103).abs() < 1e-4);
        assert!(vdh_order_for_fidelity(1.0).is_err());
    }

    #[test]
    fn objective_examples() {
        let (t, s) = (two_qubit(0.5).unwrap(), two_qubit(0.7).unwrap());
        assert_eq!(embezzler_objective(&t, &s, &pv(&[1.0])), f_lu(&t, &s).fidelity);
        assert!(embezzler_objective(&t, &s, &pv(&[0.6, 0.4])) > 0.979);
        // A uniform catalyst on a uniform target changes nothing.
        let u = embezzler_objective(&t, &s, &pv(&[0.5, 0.5]));
        assert!((u - f_lu(&t, &s).fidelity).abs() < 1e-12);
    }

    #[test]
    fn search_examples() {
        let (t, s) = (two_qubit(0.5).unwrap(), two_qubit(0.7).unwrap());
        let r = embezzler_search_lu(&t, &s, 2, 0.005, None).unwrap();
        assert!((r.catalyst.weights()[0] - 0.6).abs() < 0.01);
        let r = embezzler_search_lu(&t, &s, 1, 0.005, None).unwrap();
        assert_eq!(r.catalyst.weights(), &[1.0]);
        assert_eq!(r.fidelity, f_lu(&t, &s).fidelity);
        let r3 = embezzler_search_lu(&t, &s, 3, 0.005, None).unwrap();
        let stored = embezzler_objective(&t, &s, &pv(&[0.47, 0.32, 0.21]));
        assert!(r3.fidelity >= stored - 1e-12);
    }

    #[test]
    fn losr_search_dominates_lu() {
        let (t, s) = (two_qubit(0.5).unwrap(), two_qubit(0.7).unwrap());
        let r = embezzler_search_losr(&t, &s, 2, &EmbezzleLosrOptions::default()).unwrap();
        assert!(r.fidelity >= r.lu_fidelity);
        let same = embezzler_search_losr(&t, &t, 2, &EmbezzleLosrOptions::default()).unwrap();
        assert!((same.fidelity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reference_tables_parse() {
        let tables = reference::tables();
        assert_eq!(tables.len(), 6);
        for t in &tables {
            assert_eq!(t.rows.iter().map(|r| r.0).collect::<Vec<_>>(), (2..=8).collect::<Vec<_>>());
            for (_, r) in &t.rows {
                assert!((r.scale() - 1.0).abs() < 1e-12);
            }
        }
        assert!(reference::parse_table("3,0.5,0.5").is_err());
    }
}

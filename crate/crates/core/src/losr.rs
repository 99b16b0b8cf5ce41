//! Conversion under local operations and shared randomness.
//!
//! For pure states shared randomness adds nothing, and the optimum is
//! `max_{P'} F((P ⊗ P')↓, Q↓)`: the target party appends an ancilla with
//! distribution `P'`, both sides relabel, and the seed is matched against the
//! sorted product. An ancilla with `SR(seed) · SR(target)` entries always
//! suffices.
//!
//! Only the `SR(seed)` largest product cells meet a nonzero seed weight, and
//! for a sorted ancilla the cells `t_0 x_0, …, t_0 x_{SR(seed)-1}` dominate
//! every cell in later ancilla columns. Mass placed beyond the first
//! `SR(seed)` ancilla entries is therefore wasted, and moving it to `x_0`
//! strictly helps. Searches run over `SR(seed)` ancilla entries and pad the
//! answer with zeros.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{units_for_step, OrderedGrid, DEFAULT_BUDGET};
use crate::lu::{tensor_power, DEFAULT_TENSOR_CAP};
use crate::simplex::{bc_slices, sort_desc_in_place, ProbVector, SchmidtState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LosrMethod {
    Grid,
    Refined,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LosrResult {
    /// Achieved fidelity, a lower bound on the optimum.
    pub fidelity_lower_bound: f64,
    /// Optimizing ancilla, nonincreasing, with `SR(seed) · SR(target)`
    /// entries.
    pub ancilla: ProbVector,
    pub method: LosrMethod,
    pub grid_step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LosrOptions {
    pub step: f64,
    /// Number of top grid points refined.
    pub restarts: usize,
    pub max_iters: usize,
    /// Refinement stops once an iteration gains less than this.
    pub tol: f64,
    pub budget: f64,
    /// Node budget of the grid that seeds refinement in [`f_losr`]; the
    /// step is doubled until the grid fits.
    pub seed_budget: f64,
}

impl Default for LosrOptions {
    fn default() -> Self {
        LosrOptions {
            step: 0.005,
            restarts: 16,
            max_iters: 500,
            tol: 1e-9,
            budget: DEFAULT_BUDGET,
            seed_budget: 2e6,
        }
    }
}

/// `F((target ⊗ ancilla)↓, seed↓)`.
pub fn losr_objective(target: &SchmidtState, seed: &SchmidtState, ancilla: &ProbVector) -> f64 {
    let mut buf = Vec::new();
    objective_slices(
        target.support_weights(),
        seed.support_weights(),
        ancilla.weights(),
        &mut buf,
    )
}

pub(crate) fn objective_slices(t: &[f64], q: &[f64], x: &[f64], buf: &mut Vec<f64>) -> f64 {
    buf.clear();
    for &ti in t {
        buf.extend(x.iter().map(|&xj| ti * xj));
    }
    let k = q.len().min(buf.len());
    if k < buf.len() {
        buf.select_nth_unstable_by(k, |a, b| b.total_cmp(a));
        buf.truncate(k);
    }
    sort_desc_in_place(buf);
    let bc = bc_slices(buf, q);
    bc * bc
}

fn check_step(step: f64) -> Result<()> {
    if !(step > 0.0 && step <= 0.25) {
        return Err(Error::range("step", step, "0 < step <= 0.25"));
    }
    Ok(())
}

fn full_ancilla_dim(target: &SchmidtState, seed: &SchmidtState) -> usize {
    target.rank() * seed.rank()
}

fn padded(x: &[f64], dim: usize) -> ProbVector {
    let mut w = x.to_vec();
    w.resize(dim.max(w.len()), 0.0);
    ProbVector::new(w).expect("ancilla is a distribution")
}

/// Exhaustive search over the `step` grid of ordered ancillas.
pub fn f_losr_grid(target: &SchmidtState, seed: &SchmidtState, step: f64) -> Result<LosrResult> {
    f_losr_grid_with_budget(target, seed, step, DEFAULT_BUDGET)
}

pub fn f_losr_grid_with_budget(
    target: &SchmidtState,
    seed: &SchmidtState,
    step: f64,
    budget: f64,
) -> Result<LosrResult> {
    check_step(step)?;
    let (t, q) = (target.support_weights(), seed.support_weights());
    let grid = OrderedGrid::new(q.len(), step)?;
    let best = grid.search(budget, |x| {
        objective_slices(t, q, x, &mut Vec::with_capacity(t.len() * x.len()))
    })?;
    let ancilla = padded(&best.point, full_ancilla_dim(target, seed));
    Ok(LosrResult {
        fidelity_lower_bound: losr_objective(target, seed, &ancilla),
        ancilla,
        method: LosrMethod::Grid,
        grid_step: grid.step(),
    })
}

/// Grid search followed by pattern-wise ascent from the best grid points.
///
/// While the set of product cells meeting each seed weight is held fixed,
/// the objective is `(Σ_j c_j √x_j)²` for column weights `c_j`, maximized on
/// the sphere `√x` by `x ∝ c²`. Taking that step and re-sorting can only
/// increase the true objective, because the sorted alignment is the best
/// alignment of any fixed set of cells.
pub fn f_losr(target: &SchmidtState, seed: &SchmidtState, opts: &LosrOptions) -> Result<LosrResult> {
    check_step(opts.step)?;
    if !(opts.tol >= 0.0) {
        return Err(Error::range("tol", opts.tol, ">= 0"));
    }
    let (t, q) = (target.support_weights(), seed.support_weights());
    let dim = full_ancilla_dim(target, seed);
    let mut grid = OrderedGrid::new(q.len(), opts.step)?;
    let mut units = units_for_step(opts.step)?;
    while grid.count() > opts.seed_budget.min(opts.budget) && units >= 8 {
        units /= 2;
        grid = OrderedGrid::new(q.len(), 1.0 / units as f64)?;
    }
    let finish = |x: &[f64], method| {
        let ancilla = padded(x, dim);
        LosrResult {
            fidelity_lower_bound: losr_objective(target, seed, &ancilla),
            ancilla,
            method,
            grid_step: grid.step(),
        }
    };
    if q.len() == 1 {
        return Ok(finish(&[1.0], LosrMethod::ClosedForm));
    }
    if let Some(zeta) = exact_convertible(target, seed, 1e-9) {
        let r = finish(zeta.weights(), LosrMethod::ClosedForm);
        if r.fidelity_lower_bound >= 1.0 - 1e-9 {
            return Ok(r);
        }
    }

    let top = grid.search_top(opts.budget, opts.restarts.max(1), |x| {
        objective_slices(t, q, x, &mut Vec::with_capacity(t.len() * x.len()))
    })?;
    let (grid_value, grid_point) = top.entries[0].clone();

    let mut starts: Vec<Vec<f64>> = top.entries.into_iter().map(|(_, x)| x).collect();
    let mut delta = vec![0.0; q.len()];
    delta[0] = 1.0;
    starts.push(delta);

    let mut best = (grid_value, grid_point.clone());
    for x0 in starts {
        let (v, x) = refine(t, q, &x0, opts.max_iters, opts.tol);
        if v > best.0 {
            best = (v, x);
        }
    }
    let method = if best.1 == grid_point {
        LosrMethod::Grid
    } else {
        LosrMethod::Refined
    };
    Ok(finish(&best.1, method))
}

/// Column weights of the current sorting pattern: `c_j` sums `√(q_n t_i)`
/// over the seed ranks `n` whose matched cell lies in ancilla column `j`.
fn pattern_weights(t: &[f64], q: &[f64], x: &[f64]) -> Vec<f64> {
    let mut cells: Vec<(f64, usize, usize)> = Vec::with_capacity(t.len() * x.len());
    for (i, &ti) in t.iter().enumerate() {
        for (j, &xj) in x.iter().enumerate() {
            cells.push((ti * xj, i, j));
        }
    }
    cells.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut c = vec![0.0; x.len()];
    for (&qn, &(_, i, j)) in q.iter().zip(&cells) {
        c[j] += (qn * t[i]).sqrt();
    }
    c
}

/// Repeats the closed-form pattern step until the gain falls below `tol`.
pub(crate) fn refine(t: &[f64], q: &[f64], x0: &[f64], max_iters: usize, tol: f64) -> (f64, Vec<f64>) {
    let mut buf = Vec::new();
    let mut x = x0.to_vec();
    let mut v = objective_slices(t, q, &x, &mut buf);
    for _ in 0..max_iters {
        let c = pattern_weights(t, q, &x);
        let norm: f64 = c.iter().map(|ci| ci * ci).sum();
        if norm <= 0.0 {
            break;
        }
        let mut next: Vec<f64> = c.iter().map(|ci| ci * ci / norm).collect();
        sort_desc_in_place(&mut next);
        let nv = objective_slices(t, q, &next, &mut buf);
        if !(nv > v) {
            break;
        }
        let gain = nv - v;
        x = next;
        v = nv;
        if gain <= tol {
            break;
        }
    }
    (v, x)
}

/// Returns `ζ` when `seed` equals `target ⊗ ζ` up to ordering.
///
/// Repeatedly divides the largest remaining seed weight by the largest
/// target weight to get the next entry of `ζ`, then removes the implied
/// products `t_i ζ_k` from the seed multiset, each matched within `tol`.
pub fn exact_convertible(target: &SchmidtState, seed: &SchmidtState, tol: f64) -> Option<ProbVector> {
    let t = target.support_weights();
    let mut rest: Vec<f64> = seed.support_weights().to_vec();
    if rest.len() % t.len() != 0 {
        return None;
    }
    let mut zeta = Vec::with_capacity(rest.len() / t.len());
    while !rest.is_empty() {
        let z = rest[0] / t[0];
        for &ti in t {
            let want = ti * z;
            // `rest` is nonincreasing; find the closest entry.
            let pos = rest.partition_point(|&r| r > want);
            let cand = [pos.checked_sub(1), (pos < rest.len()).then_some(pos)];
            let hit = cand
                .into_iter()
                .flatten()
                .min_by(|&a, &b| (rest[a] - want).abs().total_cmp(&(rest[b] - want).abs()))?;
            if (rest[hit] - want).abs() > tol {
                return None;
            }
            rest.remove(hit);
        }
        zeta.push(z);
    }
    let mass: f64 = zeta.iter().sum();
    if (mass - seed.dist().scale() / target.dist().scale()).abs() > tol * zeta.len() as f64 {
        return None;
    }
    ProbVector::new(zeta).ok()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IidLuValue {
    /// `F_LU(P_p^{⊗n}, seed)`.
    pub fidelity: f64,
    /// Whether `SR(seed) <= 2n`.
    pub printed_condition_holds: bool,
}

/// LU fidelity from `seed` to `n` copies of the two-qubit state with largest
/// squared Schmidt coefficient `p`.
///
/// Requires `SR(seed) <= SR(target)^n`, so that the seed never has more
/// nonzero weights than the target power; the stricter `SR(seed) <= 2n` is
/// reported alongside. Note that LU need not be optimal among local
/// operations here: with a single copy, target `(0.9, 0.1)` and seed
/// `(0.5, 0.5)` give `F_LU = 0.8` while discarding the seed and preparing
/// `|00⟩` already reaches `0.9`.
pub fn iid_two_qubit_target_lu_optimal(p: f64, n: usize, seed: &SchmidtState) -> Result<IidLuValue> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::range("p", p, "0 <= p <= 1"));
    }
    if n == 0 {
        return Err(Error::range("n", 0.0, ">= 1"));
    }
    let p = p.max(1.0 - p);
    let target_rank = if p < 1.0 { 2usize } else { 1 };
    let r = seed.rank();
    let power_rank = (target_rank as f64).powi(n as i32);
    if r as f64 > power_rank {
        return Err(Error::Domain(format!(
            "seed Schmidt rank {r} exceeds the {power_rank} nonzero weights of {n} target copies"
        )));
    }
    // The k-th level p^{n-k}(1-p)^k appears C(n,k) times; only the first
    // SR(seed) sorted entries meet a nonzero seed weight.
    let mut top = Vec::with_capacity(r);
    let mut k = 0usize;
    let mut mult = 1.0f64;
    while top.len() < r && k <= n {
        let level = p.powi((n - k) as i32) * (1.0 - p).powi(k as i32);
        let take = (r - top.len()).min(mult.min(r as f64) as usize);
        top.extend(std::iter::repeat_n(level, take));
        mult = mult * (n - k) as f64 / (k + 1) as f64;
        k += 1;
    }
    let bc = bc_slices(&top, seed.support_weights());
    Ok(IidLuValue {
        fidelity: bc * bc,
        printed_condition_holds: r <= n * target_rank,
    })
}

/// LU value of converting `seed` into `target` via explicit tensor powers;
/// used by the i.i.d. cross-checks.
pub fn f_lu_power(target: &SchmidtState, n: usize, seed: &SchmidtState) -> Result<f64> {
    let t = tensor_power(target.weights(), n, DEFAULT_TENSOR_CAP)?;
    let bc = bc_slices(&t, seed.support_weights());
    Ok(bc * bc)
}

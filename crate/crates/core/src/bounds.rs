//! Upper bounds on the local-operations fidelity and the communication
//! lower bound from eigenvalue compression.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, NonnegativeConeT, SecondOrderConeT, SolverStatus,
};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::losr::{f_losr, LosrOptions};
use crate::lu::f_lu;
use crate::simplex::{SchmidtState, SortedProbVector};

const MASS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaResult {
    /// `log2(|S| · max S)` for the optimal retained set `S`.
    pub value: f64,
    /// Indices (into the sorted vector) of the retained weights.
    pub chosen_indices: Vec<usize>,
}

/// `Δ_ε(p) = log2 min { |S| · max_{i∈S} p_i : Σ_{i∈S} p_i >= 1 - ε }`.
///
/// For a fixed largest retained weight `p_j` the best set takes the largest
/// weights not exceeding `p_j` until the mass requirement is met, so trying
/// every distinct `p_j` is exact.
pub fn delta_epsilon(p: &SortedProbVector, eps: f64) -> Result<DeltaResult> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::range("eps", eps, "0 <= eps < 1"));
    }
    let w = p.weights();
    let need = (1.0 - eps) * p.scale() - MASS_TOL;
    let mut best: Option<(f64, usize, usize)> = None;
    for j in 0..w.len() {
        if w[j] <= 0.0 || (j > 0 && w[j] == w[j - 1]) {
            continue;
        }
        let mut mass = 0.0;
        let mut count = 0;
        for &x in &w[j..] {
            if mass >= need {
                break;
            }
            mass += x;
            count += 1;
        }
        if mass < need {
            break;
        }
        let cost = count as f64 * w[j];
        if best.is_none_or(|(c, _, _)| cost < c) {
            best = Some((cost, j, count));
        }
    }
    let (cost, j, count) = best.expect("the full support always qualifies");
    Ok(DeltaResult {
        value: cost.log2(),
        chosen_indices: (j..j + count).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HaydenWinter {
    /// Lower bound on qubits exchanged; negative means no information.
    pub q_qubits: f64,
    /// Lower bound on classical bits, `2 q_qubits`.
    pub c_bits: f64,
    /// `δ = ε^{1/8}`.
    pub delta: f64,
    pub delta_target: f64,
    pub delta_seed: f64,
}

/// Communication needed to reach fidelity `1 - ε`:
/// `q >= ½[Δ_δ(target) - Δ_0(seed)] + log2(1 - δ)` with `δ = ε^{1/8}`.
///
/// Without a seed, `Δ_0(seed)` is replaced by 0, its minimum over normalized
/// states, which can only weaken the bound.
pub fn hayden_winter_bound(
    target: &SchmidtState,
    eps: f64,
    seed: Option<&SchmidtState>,
) -> Result<HaydenWinter> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::range("eps", eps, "0 < eps < 1"));
    }
    let delta = eps.powf(0.125);
    let delta_target = delta_epsilon(target.dist(), delta)?.value;
    let delta_seed = match seed {
        Some(s) => delta_epsilon(s.dist(), 0.0)?.value,
        None => 0.0,
    };
    let q = 0.5 * (delta_target - delta_seed) + (1.0 - delta).log2();
    Ok(HaydenWinter {
        q_qubits: q,
        c_bits: 2.0 * q,
        delta,
        delta_target,
        delta_seed,
    })
}

fn bernoulli_fidelity(a: f64, b: f64) -> f64 {
    ((a * b).sqrt() + ((1.0 - a) * (1.0 - b)).max(0.0).sqrt()).powi(2)
}

/// Coarse-grains both sides to (largest weight, rest). Defined when the
/// target's largest weight does not exceed the seed's.
pub fn dp_bernoulli_bound(target: &SchmidtState, seed: &SchmidtState) -> Option<f64> {
    let (p, q) = (target.dist().max(), seed.dist().max());
    (p <= q).then(|| bernoulli_fidelity(p, q))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ManualDpBound {
    /// Bound with the pivot entry of `(target ⊗ ancilla)↓` taken to be at
    /// most `target[pivot]`.
    pub bound: f64,
    pub envelope: f64,
    /// Largest value the pivot entry of `(target ⊗ ancilla)↓` can take over
    /// all ancillas.
    pub rigorous_envelope: f64,
    /// Bound computed from `rigorous_envelope`; always valid.
    pub rigorous_bound: f64,
    /// Whether `envelope >= rigorous_envelope`, i.e. `bound` is valid.
    pub certified: bool,
}

/// Coarse-grains at sorted position `pivot` (that entry versus the rest).
///
/// The output's pivot entry is compared with the seed's pivot weight `b`: if
/// it is at most `u <= b`, data processing gives `F <= F((u,1-u),(b,1-b))`.
/// `bound` uses `u = target[pivot]`; this is not an envelope for every
/// target (e.g. two ancilla columns can push the second largest product
/// above `target[1]`), so the exact envelope is computed as well.
pub fn dp_manual_bound(target: &SchmidtState, seed: &SchmidtState, pivot: usize) -> Result<ManualDpBound> {
    let t = target.weights();
    if pivot >= t.len() {
        return Err(Error::range("pivot_index", pivot as f64, "< dim(target)"));
    }
    let b = seed.weights().get(pivot).copied().unwrap_or(0.0);
    let bound_for = |u: f64| if u >= b { 1.0 } else { bernoulli_fidelity(u, b) };
    let envelope = t[pivot];
    let rigorous_envelope = pivot_envelope(target.support_weights(), pivot);
    Ok(ManualDpBound {
        bound: bound_for(envelope),
        envelope,
        rigorous_envelope,
        rigorous_bound: bound_for(rigorous_envelope),
        certified: envelope >= rigorous_envelope,
    })
}

/// `max_{P'} ((t ⊗ P')↓)[pivot]`.
///
/// The pivot entry is at least `v` iff `pivot + 1` cells reach `v`. Column
/// `j` contributes `c_j` such cells exactly when `P'_j >= v / t[c_j - 1]`,
/// so the best value over column counts `c` summing to `pivot + 1` is
/// `1 / Σ_j 1 / t[c_j - 1]`.
fn pivot_envelope(t: &[f64], pivot: usize) -> f64 {
    fn walk(t: &[f64], rem: usize, max_part: usize, acc: f64, best: &mut f64) {
        if rem == 0 {
            *best = best.max(1.0 / acc);
            return;
        }
        for c in (1..=max_part.min(rem)).rev() {
            walk(t, rem - c, c, acc + 1.0 / t[c - 1], best);
        }
    }
    let mut best = 0.0;
    walk(t, pivot + 1, t.len(), 0.0, &mut best);
    best
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SdpBound {
    /// Upper bound from the dual objective.
    pub value: f64,
    /// Objective at the primal solution; within solver tolerance of `value`.
    pub primal: f64,
    /// Largest constraint violation of the primal solution.
    pub residual: f64,
    pub iterations: usize,
}

/// Relaxation upper bound on `max_{P'} F((P ⊗ P')↓, Q↓)`.
///
/// The `d'` largest entries `z` of any `(P ⊗ P')↓` are nonincreasing and
/// satisfy `Σ_{j<k} z_j <= Σ_{i<k} p_i`: the `k` largest cells of the joint
/// never exceed the `k` largest weights of its marginal `P`. In amplitudes
/// `y = √z` the constraints read "nonincreasing, `y >= 0`, and
/// `|y_{<k}|² <= Σ_{i<k} p_i`", a convex set, and the objective
/// `(Σ_k √q_k y_k)²` has a linear root, so the relaxation is a second-order
/// cone program. The reported value is the square of its dual objective.
pub fn sdp_relaxation_bound(target: &SchmidtState, seed: &SchmidtState, tol: f64) -> Result<SdpBound> {
    if !(tol > 0.0) {
        return Err(Error::range("tol", tol, "> 0"));
    }
    let p = target.support_weights();
    let q = seed.support_weights();
    let dp = q.len();
    let prefix: Vec<f64> = (1..=dp)
        .map(|k| p[..k.min(p.len())].iter().sum::<f64>())
        .collect();
    let c: Vec<f64> = q.iter().map(|x| x.sqrt()).collect();
    let f = |y: &[f64]| {
        let s: f64 = y.iter().zip(&c).map(|(a, b)| a * b).sum();
        s * s
    };
    // Violation in the original variables `z = y²`.
    let residual = |y: &[f64]| {
        let mut r: f64 = 0.0;
        let mut s = 0.0;
        for k in 0..dp {
            r = r.max(-y[k]);
            if k + 1 < dp {
                r = r.max(y[k + 1] * y[k + 1] - y[k] * y[k]);
            }
            s += y[k] * y[k];
            r = r.max(s - prefix[k]);
        }
        r
    };

    // The seed itself is feasible when its prefix sums never exceed the
    // target's; it then attains the maximum possible value.
    if residual(&c) <= 0.0 {
        let v = f(&c);
        return Ok(SdpBound {
            value: v,
            primal: v,
            residual: 0.0,
            iterations: 0,
        });
    }

    // Variables y; minimize -c·y subject to A y + s = b with s in
    // (nonnegative cone of dimension dp) x (one second-order cone per k).
    let (mut rows, mut cols, mut vals) = (Vec::new(), Vec::new(), Vec::new());
    let mut b = Vec::new();
    let mut cones = Vec::new();
    // y_{k+1} - y_k <= 0 and -y_last <= 0.
    for k in 0..dp {
        let r = b.len();
        if k + 1 < dp {
            rows.extend([r, r]);
            cols.extend([k + 1, k]);
            vals.extend([1.0, -1.0]);
        } else {
            rows.push(r);
            cols.push(k);
            vals.push(-1.0);
        }
        b.push(0.0);
    }
    cones.push(NonnegativeConeT(dp));
    // (√P_k, y_0, …, y_{k-1}) in the second-order cone.
    for k in 1..=dp {
        b.push(prefix[k - 1].sqrt());
        for i in 0..k {
            rows.push(b.len());
            cols.push(i);
            vals.push(-1.0);
            b.push(0.0);
        }
        cones.push(SecondOrderConeT(k + 1));
    }
    let a = CscMatrix::new_from_triplets(b.len(), dp, rows, cols, vals);
    let p_mat = CscMatrix::zeros((dp, dp));
    let lin: Vec<f64> = c.iter().map(|x| -x).collect();
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .tol_gap_abs(tol * 1e-2)
        .tol_gap_rel(tol * 1e-2)
        .tol_feas(tol * 1e-2)
        .build()
        .expect("solver settings are valid");
    let mut solver = DefaultSolver::new(&p_mat, &lin, &a, &b, &cones, settings)
        .map_err(|e| Error::Domain(format!("relaxation solver setup failed: {e}")))?;
    solver.solve();
    let sol = &solver.solution;
    let y: Vec<f64> = sol.x.iter().map(|v| v.max(0.0)).collect();
    let res = residual(&y);
    let solved = matches!(sol.status, SolverStatus::Solved | SolverStatus::AlmostSolved);
    // The dual objective bounds the maximum from above.
    let upper = (-sol.obj_val_dual).max(-sol.obj_val).max(0.0);
    if !solved || res > tol {
        return Err(Error::NonConvergence {
            best: f(&y),
            residual: res,
            iterations: sol.iterations as usize,
        });
    }
    Ok(SdpBound {
        value: (upper * upper).min(1.0),
        primal: f(&y),
        residual: res.max(0.0),
        iterations: sol.iterations as usize,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundBundle {
    pub f_lu: f64,
    pub f_losr_lower: f64,
    pub sdp_upper: f64,
    pub dp_upper: Option<f64>,
    pub hw_qubit_lower: f64,
    pub hw_cbit_lower: f64,
}

/// Every bound for one (target, seed) pair.
pub fn bound_bundle(
    target: &SchmidtState,
    seed: &SchmidtState,
    eps: f64,
    losr: &LosrOptions,
    sdp_tol: f64,
) -> Result<BoundBundle> {
    let hw = hayden_winter_bound(target, eps, Some(seed))?;
    Ok(BoundBundle {
        f_lu: f_lu(target, seed).fidelity,
        f_losr_lower: f_losr(target, seed, losr)?.fidelity_lower_bound,
        sdp_upper: sdp_relaxation_bound(target, seed, sdp_tol)?.value,
        dp_upper: dp_bernoulli_bound(target, seed),
        hw_qubit_lower: hw.q_qubits,
        hw_cbit_lower: hw.c_bits,
    })
}

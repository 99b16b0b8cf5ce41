//! Conversion under local unitaries.
//!
//! The best a pair of local unitaries can do is align the Schmidt bases so
//! that coefficients of equal rank meet, giving the fidelity of the two
//! sorted coefficient vectors.

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::simplex::{bc_slices, sort_desc_in_place, sort_desc_order, ProbVector, SchmidtState};

/// Largest explicit tensor power built by default.
pub const DEFAULT_TENSOR_CAP: usize = 20_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LuResult {
    pub fidelity: f64,
    /// `permutation_witness[i]` is the target index aligned with seed index
    /// `i`, or `None` when that seed weight is matched against padding.
    pub permutation_witness: Vec<Option<usize>>,
}

/// Optimal fidelity of turning `seed` into `target` by local unitaries.
pub fn f_lu(target: &SchmidtState, seed: &SchmidtState) -> LuResult {
    let bc = bc_slices(target.weights(), seed.weights());
    let witness = (0..seed.weights().len())
        .map(|i| (i < target.weights().len()).then_some(i))
        .collect();
    LuResult {
        fidelity: bc * bc,
        permutation_witness: witness,
    }
}

/// [`f_lu`] for vectors in arbitrary order; the witness refers to the
/// original indices.
pub fn f_lu_unsorted(target: &ProbVector, seed: &ProbVector) -> LuResult {
    let t_order = sort_desc_order(target);
    let s_order = sort_desc_order(seed);
    let bc: f64 = t_order
        .iter()
        .zip(&s_order)
        .map(|(&i, &j)| (target.weights()[i] * seed.weights()[j]).sqrt())
        .sum();
    let mut witness = vec![None; seed.dim()];
    for (rank, &j) in s_order.iter().enumerate() {
        witness[j] = t_order.get(rank).copied();
    }
    LuResult {
        fidelity: bc * bc,
        permutation_witness: witness,
    }
}

/// Mixed-unitary channels (random local unitaries) reach exactly the local
/// unitary optimum, so this is [`f_lu`].
pub fn f_lu_mixed_unitary(target: &SchmidtState, seed: &SchmidtState) -> LuResult {
    f_lu(target, seed)
}

/// LU fidelity between `n` copies of the two-qubit states with largest
/// squared Schmidt coefficients `p` (target) and `q` (seed).
///
/// Each term `C(n,k) (pq)^{(n-k)/2} ((1-p)(1-q))^{k/2}` is formed in log
/// space, so `n` in the tens of thousands is fine.
pub fn f_lu_iid_two_qubit(p: f64, q: f64, n: usize) -> Result<f64> {
    check_major(p, "p")?;
    check_major(q, "q")?;
    if n == 0 {
        return Err(Error::range("n", 0.0, ">= 1"));
    }
    let hi = (p * q).ln();
    let lo_prod = (1.0 - p) * (1.0 - q);
    if lo_prod == 0.0 {
        // Only the k = 0 term survives.
        return Ok((n as f64 * hi).exp());
    }
    let lo = lo_prod.ln();
    let nn = n as u64;
    let terms: Vec<f64> = (0..=nn)
        .map(|k| ln_binomial(nn, k) + 0.5 * ((nn - k) as f64 * hi + k as f64 * lo))
        .collect();
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = terms.iter().map(|t| (t - m).exp()).sum();
    let ln_bc = m + s.ln();
    Ok((2.0 * ln_bc).exp().min(1.0))
}

fn check_major(x: f64, name: &'static str) -> Result<()> {
    if !(0.5..=1.0).contains(&x) {
        return Err(Error::range(name, x, "1/2 <= x <= 1"));
    }
    Ok(())
}

/// Sorted `n`-fold tensor power of the positive weights of `w`.
pub fn tensor_power(w: &[f64], n: usize, cap: usize) -> Result<Vec<f64>> {
    let support: Vec<f64> = w.iter().copied().filter(|&x| x > 0.0).collect();
    let size = (support.len() as f64).powi(n as i32);
    if size > cap as f64 {
        return Err(Error::SizeCap {
            required: size,
            cap,
        });
    }
    let mut out = vec![1.0];
    for _ in 0..n {
        out = crate::simplex::tensor_slices(&out, &support);
    }
    sort_desc_in_place(&mut out);
    Ok(out)
}

/// `F_LU(target^{⊗n}, seed^{⊗m})` by explicit tensoring.
///
/// Each tensor power may hold at most `cap` positive entries.
pub fn f_lu_iid_general(
    target: &SchmidtState,
    n: usize,
    seed: &SchmidtState,
    m: usize,
    cap: usize,
) -> Result<f64> {
    let t = tensor_power(target.weights(), n, cap)?;
    let s = tensor_power(seed.weights(), m, cap)?;
    let bc = bc_slices(&t, &s);
    Ok(bc * bc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayPoint {
    pub n: usize,
    /// `F(P,Q)^n` without reordering.
    pub f_plain: f64,
    pub f_lu: f64,
}

/// Plain and LU-optimal fidelities of `n` copies for `n = 1..=n_max`.
///
/// `p` and `q` may lie anywhere in `[0,1]`; the LU series uses the larger
/// coefficient of each pair.
pub fn lu_decay_curve(p: f64, q: f64, n_max: usize) -> Result<Vec<DecayPoint>> {
    for (x, name) in [(p, "p"), (q, "q")] {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::range(name, x, "0 <= x <= 1"));
        }
    }
    let single = ((p * q).sqrt() + ((1.0 - p) * (1.0 - q)).sqrt()).powi(2);
    let (pm, qm) = (p.max(1.0 - p), q.max(1.0 - q));
    (1..=n_max)
        .into_par_iter()
        .map(|n| {
            Ok(DecayPoint {
                n,
                f_plain: single.powi(n as i32),
                f_lu: f_lu_iid_two_qubit(pm, qm, n)?,
            })
        })
        .collect()
}

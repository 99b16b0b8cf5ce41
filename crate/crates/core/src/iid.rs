//! Dilution from and distillation into copies of the maximally entangled
//! state `Φ_d`.
//!
//! With `K = d^n` the resource `Φ_d^{⊗n}` has `K` equal weights, and every
//! quantity reduces to sums of square roots over the `K` largest weights.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::losr::{objective_slices, refine};
use crate::lu::{tensor_power, DEFAULT_TENSOR_CAP};
use crate::proj::{project_monotone_nonneg, project_simplex, projected_gradient_ascent, AscentOptions};
use crate::simplex::{sort_desc_in_place, ProbVector, SchmidtState};

fn resource_size(d: usize, n: usize, cap: usize) -> Result<usize> {
    if d < 2 {
        return Err(Error::range("d", d as f64, ">= 2"));
    }
    if n == 0 {
        return Err(Error::range("copies", 0.0, ">= 1"));
    }
    let k = (d as f64).powi(n as i32);
    if k > cap as f64 {
        return Err(Error::SizeCap { required: k, cap });
    }
    Ok(k as usize)
}

fn sqrt_head_squared(w: &[f64], k: usize) -> f64 {
    let s: f64 = w.iter().take(k).map(|x| x.sqrt()).sum();
    s * s
}

/// LU fidelity of producing `target` from `Φ_d^{⊗n}`:
/// `K^{-1} (Σ_{i<K} √p_i)²`.
pub fn dilution_lu(target: &SchmidtState, d: usize, n: usize) -> Result<f64> {
    let k = resource_size(d, n, usize::MAX)?;
    Ok(sqrt_head_squared(target.support_weights(), k) / k as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DilutionOptions {
    pub max_iters: usize,
    pub restarts: usize,
    pub tol: f64,
    /// Largest `K · SR(target)` product table handled.
    pub cap: usize,
}

impl Default for DilutionOptions {
    fn default() -> Self {
        DilutionOptions {
            max_iters: 2000,
            restarts: 8,
            tol: 1e-12,
            cap: DEFAULT_TENSOR_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IidLoResult {
    pub value: f64,
    pub ancilla: ProbVector,
}

/// Local-operations fidelity of producing `target` from `Φ_d^{⊗n}`:
/// `K^{-1} max_{P'} (Σ over the K largest cells of √(P ⊗ P'))²`.
///
/// Runs projected-subgradient ascent on the simplex from several starts
/// (tied cells at the `K`-th place share the subgradient equally), then
/// polishes each end point with the pattern-wise ascent used for general
/// conversions.
pub fn dilution_lo(target: &SchmidtState, d: usize, n: usize, opts: &DilutionOptions) -> Result<IidLoResult> {
    let k = resource_size(d, n, opts.cap)?;
    let t = target.support_weights();
    if (k as f64) * (t.len() as f64) > opts.cap as f64 {
        return Err(Error::SizeCap {
            required: k as f64 * t.len() as f64,
            cap: opts.cap,
        });
    }
    let q = vec![1.0 / k as f64; k];
    let mut buf = Vec::new();
    let objective = |x: &[f64], buf: &mut Vec<f64>| objective_slices(t, &q, x, buf);

    let mut best: Option<(f64, Vec<f64>)> = None;
    for start in dilution_starts(k, opts.restarts) {
        let x = subgradient_ascent(t, k, &start, opts.max_iters);
        let mut x = x;
        sort_desc_in_place(&mut x);
        let (v, x) = refine(t, &q, &x, opts.max_iters, opts.tol);
        let v = v.max(objective(&x, &mut buf));
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, x));
        }
    }
    let (_, x) = best.expect("at least one start");
    let ancilla = ProbVector::new(x)?;
    Ok(IidLoResult {
        value: objective(ancilla.weights(), &mut buf),
        ancilla,
    })
}

/// Deterministic starts: the delta ancilla, the uniform one, and power-law
/// profiles in between.
fn dilution_starts(k: usize, restarts: usize) -> Vec<Vec<f64>> {
    let mut starts = vec![ProbVector::delta(k).into_weights()];
    starts.push(vec![1.0 / k as f64; k]);
    for r in 0..restarts.saturating_sub(2) {
        let a = 0.25 * (r + 1) as f64;
        let w: Vec<f64> = (0..k).map(|j| ((j + 1) as f64).powf(-a)).collect();
        let s: f64 = w.iter().sum();
        starts.push(w.into_iter().map(|x| x / s).collect());
    }
    // Flat on the first c columns, for a spread of c.
    let mut widths: Vec<usize> = if k <= 64 {
        (2..k).collect()
    } else {
        let mut c = 2.0f64;
        let mut v = Vec::new();
        while (c as usize) < k {
            v.push(c as usize);
            c *= 1.25;
        }
        v.dedup();
        v
    };
    widths.retain(|&c| c >= 2 && c < k);
    for c in widths {
        let mut w = vec![0.0; k];
        w[..c].fill(1.0 / c as f64);
        starts.push(w);
    }
    starts
}

/// Sum of `√(t_i x_j)` over the `k` largest cells and a subgradient in `x`.
fn top_k_sqrt(t: &[f64], x: &[f64], k: usize) -> (f64, Vec<f64>) {
    let mut cells: Vec<(f64, usize, usize)> = Vec::with_capacity(t.len() * x.len());
    for (i, &ti) in t.iter().enumerate() {
        for (j, &xj) in x.iter().enumerate() {
            cells.push((ti * xj, i, j));
        }
    }
    cells.sort_by(|a, b| b.0.total_cmp(&a.0));
    let k = k.min(cells.len());
    let value: f64 = cells[..k].iter().map(|c| c.0.sqrt()).sum();
    let mut g = vec![0.0; x.len()];
    let mut add = |c: &(f64, usize, usize), w: f64| {
        let (_, i, j) = *c;
        g[j] += w * t[i].sqrt() / (2.0 * x[j].max(1e-16).sqrt());
    };
    if k == 0 {
        return (value, g);
    }
    // Cells tied with the k-th share the remaining slots.
    let kth = cells[k - 1].0;
    let first_tie = cells.partition_point(|c| c.0 > kth);
    let last_tie = cells.partition_point(|c| c.0 >= kth);
    for c in &cells[..first_tie] {
        add(c, 1.0);
    }
    let share = (k - first_tie) as f64 / (last_tie - first_tie) as f64;
    for c in &cells[first_tie..last_tie] {
        add(c, share);
    }
    (value, g)
}

fn subgradient_ascent(t: &[f64], k: usize, x0: &[f64], iters: usize) -> Vec<f64> {
    let mut x = x0.to_vec();
    let mut best = (top_k_sqrt(t, &x, k).0, x.clone());
    for it in 1..=iters {
        let (_, g) = top_k_sqrt(t, &x, k);
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        let step = 0.1 / (norm * (it as f64).sqrt());
        let y: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + step * b).collect();
        x = project_simplex(&y, 1.0);
        let v = top_k_sqrt(t, &x, k).0;
        if v > best.0 {
            best = (v, x.clone());
        }
    }
    best.1
}

/// LU fidelity of producing `Φ_d^{⊗m}` from `n` copies of `seed`:
/// `K^{-1} (Σ_{i<K} √q_i)²` over the sorted `n`-th tensor power, `K = d^m`.
pub fn distillation_lu(seed: &SchmidtState, d: usize, m: usize, n: usize) -> Result<f64> {
    let k = resource_size(d, m, usize::MAX)?;
    let q = seed_power(seed, n)?;
    Ok(sqrt_head_squared(&q, k) / k as f64)
}

fn seed_power(seed: &SchmidtState, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::range("n", 0.0, ">= 1"));
    }
    tensor_power(seed.weights(), n, DEFAULT_TENSOR_CAP)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistillationLo {
    pub value: f64,
    pub ancilla: ProbVector,
    /// Sums of `√q` over consecutive blocks of `K` sorted weights.
    pub alpha: Vec<f64>,
    /// Value found by projected-gradient ascent over the amplitudes.
    pub numeric_value: f64,
}

/// Local-operations fidelity of producing `Φ_d^{⊗m}` from `n` copies of
/// `seed`.
///
/// The sorted product `(uniform_K ⊗ P')↓` repeats each `P'_i / K` exactly
/// `K` times, so the fidelity is `K^{-1} (Σ_i α_i √P'_i)²`. Cauchy–Schwarz
/// puts the maximum at `P' ∝ α²`, which is already nonincreasing, giving
/// `K^{-1} Σ α_i²`.
pub fn distillation_lo(seed: &SchmidtState, d: usize, m: usize, n: usize) -> Result<DistillationLo> {
    let k = resource_size(d, m, usize::MAX)?;
    let q = seed_power(seed, n)?;
    let alpha: Vec<f64> = q
        .chunks(k)
        .map(|c| c.iter().map(|x| x.sqrt()).sum())
        .collect();
    let norm: f64 = alpha.iter().map(|a| a * a).sum();
    let value = norm / k as f64;
    let ancilla = ProbVector::new(alpha.iter().map(|a| a * a / norm).collect())?;
    let numeric_value = distillation_numeric(&alpha, k);
    Ok(DistillationLo {
        value,
        ancilla,
        alpha,
        numeric_value,
    })
}

/// Projected-gradient ascent in the amplitudes `y = √P'`: maximize
/// `(α·y)² / K` over nonincreasing `y >= 0` with `|y| <= 1`. For a closed
/// convex cone the projection onto its intersection with the unit ball is
/// the cone projection scaled back into the ball.
fn distillation_numeric(alpha: &[f64], k: usize) -> f64 {
    let f = |y: &[f64]| {
        let s: f64 = y.iter().zip(alpha).map(|(y, a)| a * y).sum();
        s * s / k as f64
    };
    let grad = |y: &[f64]| {
        let s: f64 = y.iter().zip(alpha).map(|(y, a)| a * y).sum();
        alpha.iter().map(|a| 2.0 * s * a / k as f64).collect::<Vec<f64>>()
    };
    let project = |v: &[f64]| {
        let c = project_monotone_nonneg(v);
        let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1.0 {
            c.iter().map(|x| x / norm).collect()
        } else {
            c
        }
    };
    let y0 = vec![1.0 / (alpha.len() as f64).sqrt(); alpha.len()];
    let out = projected_gradient_ascent(&f, &grad, &project, &y0, AscentOptions::default());
    out.value
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lu::f_lu;

    fn st(w: &[f64]) -> SchmidtState {
        SchmidtState::new(w.to_vec()).unwrap()
    }

    #[test]
    fn dilution_lu_examples() {
        assert!((dilution_lu(&st(&[0.25; 4]), 2, 2).unwrap() - 1.0).abs() < 1e-12);
        let t = st(&[0.54, 0.02, 0.44]);
        let v = dilution_lu(&t, 3, 1).unwrap();
        assert!((v - 0.790116).abs() < 1e-6, "{v}");
        let lu = f_lu(&t, &SchmidtState::maximally_entangled(4)).fidelity;
        assert!((dilution_lu(&t, 2, 2).unwrap() - lu).abs() < 1e-15);
    }

    #[test]
    fn dilution_lo_examples() {
        let r = dilution_lo(&st(&[0.25; 4]), 2, 2, &DilutionOptions::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        let t = st(&[0.54, 0.02, 0.44]);
        let r = dilution_lo(&t, 3, 1, &DilutionOptions::default()).unwrap();
        // Seed weights pair with cells {t_0 x_0, t_1 x_0, t_0 x_1}, so the
        // optimum is ((√t_0 + √t_1)² + t_0) / 3.
        let exact = ((0.54f64.sqrt() + 0.44f64.sqrt()).powi(2) + 0.54) / 3.0;
        assert!((r.value - exact).abs() < 1e-12, "{}", r.value);
        assert!(r.value >= dilution_lu(&t, 3, 1).unwrap());
    }

    #[test]
    fn distillation_examples() {
        let s = st(&[0.25; 4]);
        assert!((distillation_lu(&s, 2, 2, 1).unwrap() - 1.0).abs() < 1e-12);
        let lo = distillation_lo(&s, 2, 2, 1).unwrap();
        assert!((lo.value - 1.0).abs() < 1e-12);
        assert_eq!(lo.ancilla.weights(), &[1.0]);

        let s = st(&[0.7, 0.3]);
        let v = distillation_lu(&s, 2, 1, 1).unwrap();
        assert!((v - 0.958257569).abs() < 1e-9);

        let lo = distillation_lo(&s, 2, 1, 2).unwrap();
        let a1 = 0.49f64.sqrt() + 0.21f64.sqrt();
        let a2 = 0.21f64.sqrt() + 0.09f64.sqrt();
        assert!((lo.value - 0.5 * (a1 * a1 + a2 * a2)).abs() < 1e-12);
        assert!((lo.numeric_value - lo.value).abs() < 1e-10);
        assert!(lo.value >= distillation_lu(&s, 2, 1, 2).unwrap());
    }
}

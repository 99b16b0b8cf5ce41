//! Probability vectors of squared Schmidt coefficients.
//!
//! A bipartite pure state is determined up to local unitaries by its multiset
//! of squared Schmidt coefficients, so every routine in this crate works on
//! nonnegative weight vectors. Vectors may be unnormalized; `scale` carries
//! the total mass.

use serde::Serialize;

use crate::error::{Error, Result};

const REL_TOL: f64 = 1e-12;

/// Nonnegative weight vector with its total mass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbVector {
    weights: Vec<f64>,
    scale: f64,
}

impl ProbVector {
    /// Validates the weights and records their sum as the scale.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        validate(&weights)?;
        let scale = weights.iter().sum::<f64>();
        if scale <= 0.0 {
            return Err(Error::ZeroMass);
        }
        Ok(ProbVector { weights, scale })
    }

    /// Like [`ProbVector::new`] but checks the sum against a declared scale.
    pub fn with_scale(weights: Vec<f64>, scale: f64) -> Result<Self> {
        validate(&weights)?;
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::range("scale", scale, "finite and > 0"));
        }
        let sum = weights.iter().sum::<f64>();
        if (sum - scale).abs() > REL_TOL * scale {
            return Err(Error::ScaleMismatch { scale, sum });
        }
        Ok(ProbVector { weights, scale })
    }

    pub fn uniform(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        ProbVector {
            weights: vec![1.0 / dim as f64; dim],
            scale: 1.0,
        }
    }

    /// `[1, 0, ..., 0]`.
    pub fn delta(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        let mut weights = vec![0.0; dim];
        weights[0] = 1.0;
        ProbVector {
            weights,
            scale: 1.0,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn is_normalized(&self) -> bool {
        (self.scale - 1.0).abs() <= REL_TOL
    }

    /// Number of strictly positive weights.
    pub fn support(&self) -> usize {
        self.weights.iter().filter(|&&w| w > 0.0).count()
    }

    pub fn normalized(&self) -> ProbVector {
        let weights = self.weights.iter().map(|w| w / self.scale).collect();
        ProbVector {
            weights,
            scale: 1.0,
        }
    }

    pub fn max(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }
}

fn validate(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::Empty);
    }
    for (index, &value) in weights.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidWeight { index, value });
        }
    }
    Ok(())
}

/// A [`ProbVector`] whose weights are nonincreasing.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SortedProbVector(ProbVector);

impl SortedProbVector {
    /// Accepts weights that are already nonincreasing.
    pub fn from_sorted(weights: Vec<f64>) -> Result<Self> {
        let v = ProbVector::new(weights)?;
        if let Some(index) = v.weights.windows(2).position(|w| w[0] < w[1]) {
            return Err(Error::NotSorted { index: index + 1 });
        }
        Ok(SortedProbVector(v))
    }

    /// Validates and sorts arbitrary weights.
    pub fn sorting(weights: Vec<f64>) -> Result<Self> {
        Ok(sort_desc(&ProbVector::new(weights)?))
    }

    pub fn uniform(dim: usize) -> Self {
        SortedProbVector(ProbVector::uniform(dim))
    }

    pub fn delta(dim: usize) -> Self {
        SortedProbVector(ProbVector::delta(dim))
    }

    pub fn as_prob(&self) -> &ProbVector {
        &self.0
    }

    pub fn into_prob(self) -> ProbVector {
        self.0
    }

    pub fn weights(&self) -> &[f64] {
        &self.0.weights
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn scale(&self) -> f64 {
        self.0.scale
    }

    pub fn is_normalized(&self) -> bool {
        self.0.is_normalized()
    }

    pub fn support(&self) -> usize {
        self.0.support()
    }

    pub fn max(&self) -> f64 {
        self.0.weights[0]
    }

    pub fn normalized(&self) -> SortedProbVector {
        SortedProbVector(self.0.normalized())
    }

    /// Drops trailing zeros, keeping at least one entry.
    pub fn trimmed(&self) -> SortedProbVector {
        let keep = self.support().max(1);
        SortedProbVector(ProbVector {
            weights: self.0.weights[..keep].to_vec(),
            scale: self.0.scale,
        })
    }

    pub fn embed(&self, dim: usize) -> Result<SortedProbVector> {
        embed(&self.0, dim).map(SortedProbVector)
    }
}

/// Squared Schmidt coefficients of a pure state, kept in canonical order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchmidtState {
    dist: SortedProbVector,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

impl SchmidtState {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        Ok(Self::from_dist(SortedProbVector::sorting(weights)?))
    }

    pub fn from_dist(dist: SortedProbVector) -> Self {
        SchmidtState { dist, label: None }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// Maximally entangled state of local dimension `d`.
    pub fn maximally_entangled(d: usize) -> Self {
        Self::from_dist(SortedProbVector::uniform(d))
    }

    pub fn dist(&self) -> &SortedProbVector {
        &self.dist
    }

    pub fn weights(&self) -> &[f64] {
        self.dist.weights()
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    /// Schmidt rank: the number of strictly positive weights.
    pub fn rank(&self) -> usize {
        self.dist.support()
    }

    /// The positive weights only.
    pub fn support_weights(&self) -> &[f64] {
        &self.dist.weights()[..self.rank()]
    }
}

/// Sorts into nonincreasing order; equal weights keep their original order.
pub fn sort_desc(v: &ProbVector) -> SortedProbVector {
    let mut weights = v.weights.clone();
    weights.sort_by(|a, b| b.total_cmp(a));
    SortedProbVector(ProbVector {
        weights,
        scale: v.scale,
    })
}

/// Indices of `v` in the order [`sort_desc`] visits them.
pub fn sort_desc_order(v: &ProbVector) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.dim()).collect();
    idx.sort_by(|&a, &b| v.weights[b].total_cmp(&v.weights[a]));
    idx
}

/// Sorts a raw slice into nonincreasing order.
pub fn sort_desc_in_place(xs: &mut [f64]) {
    xs.sort_unstable_by(|a, b| b.total_cmp(a));
}

/// Product distribution with `a` as the major index.
pub fn tensor(a: &ProbVector, b: &ProbVector) -> ProbVector {
    ProbVector {
        weights: tensor_slices(&a.weights, &b.weights),
        scale: a.scale * b.scale,
    }
}

pub(crate) fn tensor_slices(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        out.extend(b.iter().map(|&y| x * y));
    }
    out
}

/// `Σ √(p_i q_i)`, the shorter vector padded with zeros.
pub fn bhattacharyya(p: &ProbVector, q: &ProbVector) -> f64 {
    bc_slices(&p.weights, &q.weights)
}

pub(crate) fn bc_slices(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a * b).sqrt()).sum()
}

/// Squared Bhattacharyya coefficient.
pub fn fidelity_classical(p: &ProbVector, q: &ProbVector) -> f64 {
    let bc = bhattacharyya(p, q);
    bc * bc
}

/// Zero-pads to `dim` entries.
pub fn embed(v: &ProbVector, dim: usize) -> Result<ProbVector> {
    if dim < v.dim() {
        return Err(Error::Dimension {
            requested: dim,
            actual: v.dim(),
        });
    }
    let mut weights = v.weights.clone();
    weights.resize(dim, 0.0);
    Ok(ProbVector {
        weights,
        scale: v.scale,
    })
}

/// `(Σ σ_i^p)^{1/p}` over the `k` largest entries.
pub fn kp_quasi_norm(v: &ProbVector, k: usize, p: f64) -> Result<f64> {
    if k < 1 || k > v.dim() {
        return Err(Error::range("k", k as f64, "1 <= k <= dim"));
    }
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::range("p", p, "finite and > 0"));
    }
    let sorted = sort_desc(v);
    let s: f64 = sorted.weights()[..k].iter().map(|x| x.powf(p)).sum();
    Ok(s.powf(1.0 / p))
}

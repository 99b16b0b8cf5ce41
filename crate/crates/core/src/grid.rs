//! Exhaustive search over the discretized ordered simplex.
//!
//! Grid points are nonincreasing vectors whose entries are multiples of
//! `step` and sum to one, i.e. partitions of `N = 1/step` into at most `dim`
//! parts. Points are visited in lexicographically descending order and a
//! point replaces the incumbent only on strict improvement, so ties resolve
//! to the lexicographically largest point regardless of thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Default cap on the number of grid points a single search may visit.
pub const DEFAULT_BUDGET: f64 = 1e9;

/// Exact node counting is used up to this many units; beyond it the
/// uncapped partition count serves as the estimate.
const EXACT_COUNT_UNITS: u32 = 1000;

#[derive(Debug, Clone)]
pub struct OrderedGrid {
    dim: usize,
    units: u32,
    caps: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridBest {
    pub value: f64,
    pub point: Vec<f64>,
    pub evaluated: u64,
}

/// The `k` best grid points, best first, with the same tie-break as
/// [`OrderedGrid::search`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridTop {
    pub entries: Vec<(f64, Vec<f64>)>,
    pub evaluated: u64,
}

impl OrderedGrid {
    pub fn new(dim: usize, step: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::range("dim", 0.0, ">= 1"));
        }
        let units = units_for_step(step)?;
        Ok(OrderedGrid {
            dim,
            units,
            caps: vec![units; dim],
        })
    }

    /// Restricts entry `i` to at most `caps[i]`; missing entries stay free.
    pub fn with_caps(mut self, caps: &[f64]) -> Self {
        for (c, &cap) in self.caps.iter_mut().zip(caps) {
            let u = (cap * self.units as f64 + 1e-9).floor().max(0.0) as u32;
            *c = u.min(self.units);
        }
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn step(&self) -> f64 {
        1.0 / self.units as f64
    }

    pub fn is_capped(&self) -> bool {
        self.caps.iter().any(|&c| c < self.units)
    }

    /// Number of grid points (exact for moderate resolutions, otherwise the
    /// uncapped count, which is an upper bound).
    pub fn count(&self) -> f64 {
        if self.units <= EXACT_COUNT_UNITS {
            self.count_exact()
        } else {
            partitions_at_most(self.units as usize, self.dim)
        }
    }

    fn count_exact(&self) -> f64 {
        let n = self.units as usize;
        // next[rem][m]: ways to fill the remaining positions with sum `rem`
        // and every entry <= m.
        let mut next = vec![vec![0.0f64; n + 1]; n + 1];
        for row in next[0].iter_mut() {
            *row = 1.0;
        }
        for pos in (0..self.dim).rev() {
            let cap = self.caps[pos] as usize;
            let mut cur = vec![vec![0.0f64; n + 1]; n + 1];
            for rem in 0..=n {
                let mut acc = 0.0;
                for m in 0..=n {
                    if m <= cap && m <= rem {
                        acc += next[rem - m][m];
                    }
                    cur[rem][m] = acc;
                }
            }
            next = cur;
        }
        next[n][n]
    }

    /// Maximizes `objective` over every grid point.
    pub fn search<F>(&self, budget: f64, objective: F) -> Result<GridBest>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let top = self.search_top(budget, 1, objective)?;
        let (value, point) = top.entries.into_iter().next().expect("nonempty");
        Ok(GridBest {
            value,
            point,
            evaluated: top.evaluated,
        })
    }

    /// Keeps the `k` best grid points.
    pub fn search_top<F>(&self, budget: f64, k: usize, objective: F) -> Result<GridTop>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let required = self.count();
        if required > budget {
            return Err(Error::Budget { required, budget });
        }
        let k = k.max(1);
        let n = self.units;
        let lo = n.div_ceil(self.dim as u32);
        let hi = n.min(self.caps[0]);
        let firsts: Vec<u32> = (lo..=hi).rev().collect();
        // Strata come back in visiting order, so a stable merge reproduces
        // the sequential result exactly.
        let strata: Vec<(Vec<(f64, Vec<f64>)>, u64)> = firsts
            .into_par_iter()
            .map(|a0| {
                let mut walker = Walker::new(self, &objective, k);
                walker.point[0] = a0 as f64 / n as f64;
                if self.dim == 1 {
                    walker.visit();
                } else if self.fits(1, n - a0, a0) {
                    walker.fill(1, n - a0, a0);
                }
                (walker.top, walker.evaluated)
            })
            .collect();
        let mut entries = Vec::new();
        let mut evaluated = 0;
        for (top, count) in strata {
            evaluated += count;
            for e in top {
                insert_top(&mut entries, e, k);
            }
        }
        if entries.is_empty() {
            return Err(Error::Domain(
                "the capped grid contains no point summing to one".into(),
            ));
        }
        Ok(GridTop { entries, evaluated })
    }

    /// Whether `rem` units fit into positions `pos..` with entries <= `maxv`.
    fn fits(&self, pos: usize, rem: u32, maxv: u32) -> bool {
        let room: u64 = self.caps[pos..]
            .iter()
            .map(|&c| c.min(maxv) as u64)
            .sum();
        rem as u64 <= room
    }
}

struct Walker<'a, F> {
    grid: &'a OrderedGrid,
    objective: &'a F,
    point: Vec<f64>,
    top: Vec<(f64, Vec<f64>)>,
    keep: usize,
    evaluated: u64,
}

impl<'a, F: Fn(&[f64]) -> f64> Walker<'a, F> {
    fn new(grid: &'a OrderedGrid, objective: &'a F, keep: usize) -> Self {
        Walker {
            grid,
            objective,
            point: vec![0.0; grid.dim],
            top: Vec::with_capacity(keep + 1),
            keep,
            evaluated: 0,
        }
    }

    fn fill(&mut self, pos: usize, rem: u32, prev: u32) {
        let g = self.grid;
        let n = g.units as f64;
        if pos == g.dim - 1 {
            // `fits` guarantees rem <= min(prev, cap).
            self.point[pos] = rem as f64 / n;
            self.visit();
            return;
        }
        let hi = prev.min(rem).min(g.caps[pos]);
        let lo = rem.div_ceil((g.dim - pos) as u32);
        if lo > hi {
            return;
        }
        for a in (lo..=hi).rev() {
            if !g.fits(pos + 1, rem - a, a) {
                continue;
            }
            self.point[pos] = a as f64 / n;
            self.fill(pos + 1, rem - a, a);
        }
    }

    fn visit(&mut self) {
        self.evaluated += 1;
        let v = (self.objective)(&self.point);
        let full = self.top.len() == self.keep;
        if full && !(v > self.top[self.keep - 1].0) {
            return;
        }
        insert_top(&mut self.top, (v, self.point.clone()), self.keep);
    }
}

/// Inserts after every entry with an equal or better value, so earlier
/// (lexicographically larger) points win ties.
fn insert_top(top: &mut Vec<(f64, Vec<f64>)>, entry: (f64, Vec<f64>), keep: usize) {
    let pos = top.partition_point(|(v, _)| *v >= entry.0);
    if pos >= keep {
        return;
    }
    top.insert(pos, entry);
    top.truncate(keep);
}

/// `round(1/step)`, rejecting steps that do not divide one.
pub fn units_for_step(step: f64) -> Result<u32> {
    if !(step.is_finite() && step > 0.0 && step <= 1.0) {
        return Err(Error::range("step", step, "0 < step <= 1"));
    }
    let inv = 1.0 / step;
    let units = inv.round();
    if (inv - units).abs() > 1e-9 * units || units > u32::MAX as f64 {
        return Err(Error::range("step", step, "1/step must be an integer"));
    }
    Ok(units as u32)
}

/// Partitions of `n` into at most `k` parts.
fn partitions_at_most(n: usize, k: usize) -> f64 {
    let mut p = vec![0.0f64; n + 1];
    p[0] = 1.0;
    for part in 1..=k {
        for m in part..=n {
            p[m] += p[m - part];
        }
    }
    // Conjugation: parts <= k  <=>  at most k parts.
    p[n]
}

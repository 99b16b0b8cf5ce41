//! Euclidean projections and a projected-gradient ascent driver.

/// Projection onto the cone of nonincreasing vectors (pool adjacent
/// violators).
pub fn isotonic_nonincreasing(y: &[f64]) -> Vec<f64> {
    // Blocks of (sum, count); merge while a later block mean exceeds an
    // earlier one.
    let mut sums: Vec<f64> = Vec::with_capacity(y.len());
    let mut counts: Vec<usize> = Vec::with_capacity(y.len());
    for &v in y {
        sums.push(v);
        counts.push(1);
        while sums.len() > 1 {
            let n = sums.len();
            let last = sums[n - 1] / counts[n - 1] as f64;
            let prev = sums[n - 2] / counts[n - 2] as f64;
            if last <= prev {
                break;
            }
            let (s, c) = (sums.pop().unwrap(), counts.pop().unwrap());
            sums[n - 2] += s;
            counts[n - 2] += c;
        }
    }
    let mut out = Vec::with_capacity(y.len());
    for (s, c) in sums.iter().zip(&counts) {
        out.extend(std::iter::repeat_n(s / *c as f64, *c));
    }
    out
}

/// Projection onto `{x >= 0, Σx = mass}`.
pub fn project_simplex(v: &[f64], mass: f64) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cum += uj;
        let t = (cum - mass) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Projection onto nonincreasing, nonnegative vectors.
pub fn project_monotone_nonneg(v: &[f64]) -> Vec<f64> {
    isotonic_nonincreasing(v)
        .into_iter()
        .map(|x| x.max(0.0))
        .collect()
}

/// Projection onto the ordered simplex `{x_0 >= x_1 >= ... >= 0, Σx = 1}`.
///
/// The multiplier of `Σx = 1` shifts every entry equally and commutes with
/// the isotonic fit, so the projection is `max(iso(v) - μ, 0)`: the simplex
/// projection of `iso(v)`.
pub fn project_ordered_simplex(v: &[f64]) -> Vec<f64> {
    project_simplex(&isotonic_nonincreasing(v), 1.0)
}

#[derive(Debug, Clone, Copy)]
pub struct AscentOptions {
    pub max_iters: usize,
    /// Stop once `P(x + s·∇f) - x`, with `s` the initial step, has no entry
    /// larger than this.
    pub tol: f64,
    pub initial_step: f64,
}

impl Default for AscentOptions {
    fn default() -> Self {
        AscentOptions {
            max_iters: 10_000,
            tol: 1e-12,
            initial_step: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AscentOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after each accepted step, starting with the initial point.
    pub history: Vec<f64>,
}

/// Projected-gradient ascent with Armijo backtracking along the projection
/// arc. Only ascent steps are accepted, so the objective never decreases.
pub fn projected_gradient_ascent(
    f: &dyn Fn(&[f64]) -> f64,
    grad: &dyn Fn(&[f64]) -> Vec<f64>,
    project: &dyn Fn(&[f64]) -> Vec<f64>,
    x0: &[f64],
    opts: AscentOptions,
) -> AscentOutcome {
    let mut x = project(x0);
    let mut fx = f(&x);
    let mut history = vec![fx];
    let mut step = opts.initial_step;
    let mut stalled = 0;
    for it in 1..=opts.max_iters {
        let g = grad(&x);
        let mut accepted = None;
        let mut t = step;
        for _ in 0..200 {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + t * b).collect();
            let y = project(&trial);
            let fy = f(&y);
            let lin: f64 = g.iter().zip(y.iter().zip(&x)).map(|(gi, (yi, xi))| gi * (yi - xi)).sum();
            if fy >= fx + 1e-4 * lin && fy >= fx || fy > fx {
                accepted = Some((y, fy));
                break;
            }
            t *= 0.5;
        }
        let Some((y, fy)) = accepted else {
            return AscentOutcome {
                x,
                value: fx,
                iterations: it,
                converged: true,
                history,
            };
        };
        stalled = if fy - fx <= 4.0 * f64::EPSILON * fx.abs() { stalled + 1 } else { 0 };
        x = y;
        fx = fy;
        history.push(fx);
        step = (t * 2.0).min(1e12);
        // A short accepted step can come from backtracking alone, so the
        // stationarity test uses a fixed step.
        let g = grad(&x);
        let probe: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + opts.initial_step * b).collect();
        let residual = project(&probe)
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        // Near the optimum the residual can sit below what the objective can
        // resolve; many steps without a representable gain also end the run.
        if residual <= opts.tol || stalled >= 50 {
            return AscentOutcome {
                x,
                value: fx,
                iterations: it,
                converged: true,
                history,
            };
        }
    }
    AscentOutcome {
        x,
        value: fx,
        iterations: opts.max_iters,
        converged: false,
        history,
    }
}

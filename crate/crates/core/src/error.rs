use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("distribution is empty")]
    Empty,
    #[error("entry {index} is invalid: {value} (weights must be finite and >= 0)")]
    InvalidWeight { index: usize, value: f64 },
    #[error("distribution has zero total mass")]
    ZeroMass,
    #[error("scale {scale} does not match weight sum {sum}")]
    ScaleMismatch { scale: f64, sum: f64 },
    #[error("weights are not nonincreasing at index {index}")]
    NotSorted { index: usize },
    #[error("target dimension {requested} is smaller than vector dimension {actual}")]
    Dimension { requested: usize, actual: usize },
    #[error("{name} = {value} is out of range (expected {expected})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("search needs {required:.3e} grid nodes, budget is {budget:.3e}")]
    Budget { required: f64, budget: f64 },
    #[error("explicit vector of {required:.3e} entries exceeds the cap of {cap}")]
    SizeCap { required: f64, cap: usize },
    #[error("{0}")]
    Domain(String),
    #[error(
        "solver stopped after {iterations} iterations without converging \
         (best value {best}, feasibility residual {residual:.3e})"
    )]
    NonConvergence {
        best: f64,
        residual: f64,
        iterations: usize,
    },
}

impl Error {
    pub(crate) fn range(name: &'static str, value: f64, expected: &'static str) -> Self {
        Error::OutOfRange {
            name,
            value,
            expected,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

//! Optimal conversion fidelities between bipartite pure states.
//!
//! States are represented by their squared Schmidt coefficients. The crate
//! covers conversion by local unitaries ([`lu`]) and by local operations
//! with shared randomness ([`losr`]), upper and lower bounds ([`bounds`]),
//! many-copy dilution and distillation ([`iid`]), and embezzling
//! catalysts ([`embezzle`]).

pub mod bounds;
pub mod embezzle;
pub mod error;
pub mod grid;
pub mod iid;
pub mod losr;
pub mod lu;
pub mod proj;
pub mod simplex;

pub use error::{Error, Result};
pub use simplex::{
    bhattacharyya, embed, fidelity_classical, kp_quasi_norm, sort_desc, tensor, ProbVector,
    SchmidtState, SortedProbVector,
};

//! Crate-wide error type.

use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A concentration argument was negative where the isotherm requires
    /// nonnegative inputs.
    #[error("negative concentration c[{component}] = {value}")]
    NegativeConcentration { component: usize, value: f64 },

    /// Two vectors that must have equal length did not.
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// A point fell outside the domain an operation is defined on.
    #[error("{what} = {value} outside [{lo}, {hi}]")]
    OutOfDomain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    /// An invalid configuration value.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The time integrator produced a non-finite or exploding state.
    #[error("solver instability at step {step} (tau = {tau})")]
    Instability { step: usize, tau: f64 },

    /// The per-node 2x2 system `(I + F Q)` was numerically singular.
    #[error("singular local system at node {node} (det = {det})")]
    SingularSystem { node: usize, det: f64 },

    /// The training callable returned non-finite values at the listed nodes.
    #[error("non-finite training values at {} node(s), first index {}", .nodes.len(), .nodes.first().copied().unwrap_or(usize::MAX))]
    NonFiniteTraining { nodes: Vec<usize> },

    /// An observation schedule time lies outside the curve support.
    #[error("schedule time {time} outside curve range [{lo}, {hi}]")]
    ScheduleOutOfRange { time: f64, lo: f64, hi: f64 },

    /// A sampler finished without accepting a single move.
    #[error("no accepted moves over {iterations} iterations")]
    NoAcceptedMoves { iterations: usize },
}

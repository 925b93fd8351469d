use thiserror::Error;

/// Errors returned by the lattice, metric, conjugate, quadrature and counting layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("inequality system is infeasible: the polytope is empty")]
    EmptyPolytope,
    #[error("polyhedron is unbounded")]
    Unbounded,
    #[error("cone {cone} admits no integral linear form matching the divisor")]
    NonCartier { cone: usize },
    #[error("polytope is not full-dimensional")]
    DegeneratePolytope,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid fan: {0}")]
    InvalidFan(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("convex hull of the metric points differs from the reference polytope")]
    DomainMismatch,
    #[error("point lies outside the polytope, the conjugate is not finite there")]
    NotInDomain,
    #[error("metric is not smooth")]
    NotSmooth,
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("enumeration budget of {budget} nodes exceeded (counted at least {partial} points)")]
    BudgetExceeded { budget: u64, partial: u128 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

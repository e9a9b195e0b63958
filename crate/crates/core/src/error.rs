use thiserror::Error;

use crate::rational::Rational;

/// Errors raised anywhere in the pipeline.
///
/// Vertex indices carried by variants are 0-based, matching the wire format.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error(
        "ball intersection for vertices {vertices:?} is within tolerance of epsilon \
         (margin {margin:e}); perturb epsilon or tighten --tol"
    )]
    Inconclusive { vertices: Vec<usize>, margin: f64 },

    #[error("node budget of {budget} exhausted; best packing value {incumbent}, upper bound {bound}")]
    BudgetExceeded { budget: u64, incumbent: Box<Rational>, bound: Box<Rational> },

    #[error("more than {limit} maximal cliques")]
    CliqueLimit { limit: usize },

    #[error("size cap exceeded: {0}")]
    SizeCap(String),

    #[error("packing vector is infeasible: {0}")]
    InfeasiblePacking(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

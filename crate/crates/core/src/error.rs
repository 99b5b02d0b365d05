use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of a closed-form expression.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("order {d} is not a valid character order modulo {p} (need d >= 2 and d | p - 1)")]
    InvalidOrder { p: u64, d: u64 },

    #[error("modulus {p} exceeds the discrete-log table limit {limit}; use kernel membership instead")]
    TableLimit { p: u64, limit: u64 },

    /// The nonresidue search hit its cap. `found` holds the primes found so far.
    #[error("search cap {cap} exhausted modulo {p} (order {d}) after {} of {wanted} nonresidues", found.len())]
    SearchCap {
        p: u64,
        d: u64,
        cap: u64,
        wanted: usize,
        found: Vec<u64>,
    },

    #[error("could not factor {0} within the effort budget")]
    Factorization(u64),

    /// The supplied instance does not satisfy the hypothesis of a lemma. This is
    /// distinct from a failed inequality.
    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

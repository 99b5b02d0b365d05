//! Explicit upper bounds for the smallest prime nonresidues of a Dirichlet
//! character modulo a prime.
//!
//! The crate is split along the lines of the computation:
//!
//! * [`constants`] evaluates the closed-form constant `g(n, p)`, the auxiliary
//!   threshold `X*`, the validity conditions, and regenerates the table of
//!   constants `C = g(n0, p0)`.
//! * [`character`] does exact character arithmetic modulo a prime and finds the
//!   `n` smallest prime nonresidues of a character of order `d`.
//! * [`lemmas`] checks every inequality of the Burgess-style argument by exact
//!   or directed-rounding brute force on desk-scale instances.
//! * [`scanner`] sweeps ranges of primes and checks `q_n <= C p^{1/4} (log p)^{(n+1)/2}`
//!   empirically, with sharding, checkpointing and aggregation.
//!
//! All logarithms are natural logarithms.

pub mod arith;
pub mod character;
pub mod constants;
pub mod error;
pub mod lemmas;
pub mod rounding;
pub mod scanner;
pub mod sieve;

pub use error::{Error, Result};

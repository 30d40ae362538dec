//! Extinction times of subcritical two-sex branching processes.
//!
//! A population of `z` mating units produces, per unit, a random litter of
//! `(females, males)` drawn from an [`OffspringLaw`]; a [`MatingRule`] `zeta`
//! turns the pooled litters into the next generation of units:
//!
//! ```text
//! Z_0 = i,    Z_n = zeta(f_1 + .. + f_Z_{n-1}, m_1 + .. + m_Z_{n-1})
//! ```
//!
//! The time to extinction is `T = min { n >= 1 : Z_n = 0 }`. For subcritical
//! processes this crate computes
//!
//! * closed-form envelopes on the distribution of `T` from two associated
//!   single-sex processes (the female-line process above, the sibling-mated
//!   process below), with explicit constants ([`analytic`]);
//! * certified two-sided bounds from truncated absorbing Markov chains, with
//!   truncation-error certificates and a cap chooser ([`chains`]);
//! * exact and Monte Carlo truncated transition matrices, deterministic
//!   parallel simulation of extinction times, and growth rates ([`engine`]);
//! * interval bounds on the mean time to extinction ([`analytic`]).
//!
//! Every capability has a runnable demo under `examples/`:
//!
//! ```text
//! cargo run --example bounds_report       analytic tail + mean bounds
//! cargo run --example chain_bounds        truncated-chain sandwich + certificates
//! cargo run --example comparison_table    envelope/chain comparison grid
//! cargo run --example simulate            deterministic Monte Carlo cdf
//! cargo run --example geometric_family    closed-form modified-geometric family
//! cargo run --example mating_checks       mating-rule property certification
//! cargo run --example coupled_paths       pathwise envelope ordering
//! ```
//!
//! The same operations are scriptable through the `bgwp` binary
//! (`bounds`, `table1`, `simulate`, `check` subcommands).

pub mod analytic;
pub mod chains;
pub mod cli;
pub mod engine;
pub mod mating;
pub mod offspring;

pub use analytic::{MeanBound, TailBound};
pub use chains::ChainBoundTable;
pub use engine::{GrowthRate, ProcessSpec, TruncatedTransitionMatrix};
pub use mating::MatingRule;
pub use offspring::{OffspringLaw, OffspringMoments};

/// Errors shared by every module in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter fails a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// Truncating an unbounded offspring support would need more states than
    /// the cap allows; the tail is too heavy to enumerate.
    #[error("support truncation needs {required} states but the cap is {cap}; \
             the offspring tail is too heavy for exact enumeration")]
    TruncationCap { required: usize, cap: usize },
    /// The process is critical or supercritical; extinction-time bounds here
    /// cover the subcritical regime only.
    #[error("{quantity} = {value} lies outside the subcritical regime (< 1 required); \
             critical and supercritical processes are out of scope")]
    OutOfScope { quantity: &'static str, value: f64 },
    /// A run configuration failed to parse or validate.
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

//! Finite-blocklength laboratory for classical-quantum channel coding.
//!
//! The crate evaluates, at explicit blocklength `n`, the constructive objects
//! of the information-spectrum treatment of cq-channel capacity:
//!
//! - dense Hermitian operator calculus with spectral projections of the
//!   form `{A > 0}` ([`operator`]),
//! - classical-quantum channels, finite input distributions, cost budgets
//!   and type-class combinatorics ([`channel`]),
//! - quantum relative entropy, the Holevo quantity, capacity optimization
//!   with and without cost constraint, and error exponents ([`capacity`]),
//! - information-spectrum tail probabilities and sweeps ([`spectrum`]),
//! - square-root-measurement codes, random-coding experiments and converse
//!   bounds ([`coding`]),
//! - randomized verification of the operator inequalities the coding bounds
//!   rest on ([`inequality`]).
//!
//! Everything is computed for finite `n`; asymptotic quantities are only ever
//! approached through labeled finite-`n` brackets, never claimed as limits.

pub mod capacity;
pub mod channel;
pub mod coding;
pub mod config;
pub mod error;
pub mod files;
pub mod inequality;
pub mod operator;
pub mod parallel;
pub mod presets;
pub mod rng;
pub mod runner;
pub mod spectrum;

#[cfg(test)]
pub(crate) mod testutil;

pub use config::Tolerances;
pub use error::{Error, Result};
pub use operator::{Comparator, DensityMatrix, HermitianOperator, SpectralDecomposition};

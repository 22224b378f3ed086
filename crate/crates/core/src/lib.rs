//! Synthetic SAT/UNSAT instance generation with exhaustive verification.
//!
//! Formulas are produced by two generators: one that covers a hidden
//! assignment (always satisfiable) and one that grows an unsatisfiable core by
//! inverting resolution steps. The [`pipeline`] module mixes both into labeled
//! datasets; [`oracle`] provides brute-force ground truth for small instances.

mod clause_gen;
pub mod cli;
pub mod cnf;
pub mod oracle;
pub mod pipeline;
pub mod rand_dist;
pub mod sat_gen;
pub mod unsat_gen;

#[cfg(test)]
mod testutil;

use thiserror::Error;

pub use clause_gen::{RandomClauseSampler, CLAUSE_BLOCK};
pub use cnf::{Assignment, Clause, Cnf, Label, LabeledProblem, Literal, Witness};
pub use rand_dist::{DistributionSpec, RngState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Sample(#[from] rand_dist::SampleError),
    #[error(transparent)]
    Cnf(#[from] cnf::CnfError),
    #[error("clause {index} is empty")]
    EmptyClause { index: usize },
    #[error("clause {index} already mentions every variable")]
    FullClause { index: usize },
    #[error("bloom trace does not replay: {0}")]
    BadTrace(String),
}

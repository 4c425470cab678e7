//! Linear contracts for multi-agent principal-agent problems.
//!
//! A principal offers each agent `i` a share `α_i` of the reward `f(S)`
//! produced by the set `S` of agents who work. This crate evaluates, solves
//! and verifies such problems for additive, XOS and submodular `f`.

pub mod additive;
pub mod agents;
pub mod approx;
pub mod bench;
pub mod contract;
pub mod error;
pub mod format;
pub mod instances;
pub mod report;
pub mod scalar;
pub mod setfn;
pub mod solve;
pub mod verify;

pub use agents::AgentSet;
pub use contract::{Contract, Instance, Metadata};
pub use error::{Error, Result};
pub use report::{Algorithm, SolveReport};
pub use scalar::{Rational, Scalar, Utility};
pub use setfn::{Oracle, PriceVector, QueryCounter, RewardFunction};
pub use solve::{solve, SolveOptions};

//! Verification engine for card-based AND protocols.
//!
//! A protocol written in the small `.cbp` language is executed
//! symbolically over all four input pairs at once, producing a KWH-tree:
//! a graph of card-sequence boxes annotated with exact rational
//! probability polynomials. From that tree the verifier decides
//! security (no turn leaks information about the inputs), correctness
//! (every terminal encodes a AND b), termination class, and exact
//! expected runtime. A Monte Carlo simulator cross-checks the symbolic
//! answers on concrete sampled runs.

pub mod cards;
pub mod corpus;
pub mod dot;
pub mod dsl;
pub mod engine;
pub mod markov;
pub mod perm;
pub mod poly;
pub mod rational;
pub mod report;
pub mod shuffle;
pub mod simulator;
pub mod verifier;

pub use cards::{Face, Orientation, Sequence};
pub use dsl::{parse_protocol, Mode, ParseError, Protocol};
pub use engine::{build_kwh_tree, BuildError, KwhBox, KwhTree, DEFAULT_NODE_BUDGET};
pub use perm::Permutation;
pub use poly::{ProbPoly, Symbol};
pub use rational::Rat;
pub use shuffle::ShuffleSpec;
pub use verifier::{full_report, full_report_with_budget, Metric, Termination, VerificationReport};

//! cutrx: a toolkit for propositional sequent calculi with one principal
//! formula per logical rule, additive contexts, and context restrictions.
//!
//! The crate provides:
//! - declarative calculi ([`calculus`]) and their syntactic classification
//!   ([`classifier`]): substitution properties, invertibility, variable
//!   properties, identity expansion and principal-pair witnesses;
//! - an independent proof checker with occurrence-level ancestry
//!   ([`kernel`]);
//! - the cut-restriction engine ([`engine`]) rewriting arbitrary multicuts
//!   into analytic ones, with full cut-elimination for class 1 calculi;
//! - bounded proof search and random proof generation ([`search`]);
//! - built-in calculi and worked proofs ([`catalog`]).

pub mod calculus;
pub mod catalog;
pub mod classifier;
pub mod engine;
pub mod formula;
pub mod kernel;
pub mod search;
pub(crate) mod sexp;

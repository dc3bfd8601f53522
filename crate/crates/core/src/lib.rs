//! Hybrid HMM decoding with full-sum or Viterbi combination of state
//! alignments, inside one prefix-tree search without word-history
//! recombination.
//!
//! Strategies are selected by name at runtime:
//!
//! - path combination: [`search::combiners`] (`viterbi`, `fullsum`)
//! - decision rule: [`decision::decision_rules`] (`map`, `cn`)
//!
//! The [`oracle`] module scores every word sequence by brute force and is
//! the reference for all decoder tests.

pub mod decision;
pub mod error;
pub mod eval;
pub mod harness;
pub mod model;
pub mod oracle;
pub mod registry;
pub mod score;
pub mod search;

pub use error::{Error, Result};
pub use score::{score_add, Score};

/// Sentence-end token as written in lattice files.
pub const SENTENCE_END: &str = "</s>";

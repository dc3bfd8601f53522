//! Prefix-tree search with Viterbi or full-sum path combination.

mod beam;
mod combine;
mod decoder;
mod history;
mod lattice;
mod tree;

pub use beam::{prune, Beam, BeamConfig, SearchHypothesis};
pub use combine::{combiners, FullSum, PathCombiner, Viterbi};
pub use decoder::{
    decode, CompleteHypothesis, DecodeOutput, Decoder, SearchState, SearchStats, WordBoundary,
};
pub use history::{HistoryArena, HistoryId, TraceArena, TraceId, WordTrace};
pub use lattice::{Lattice, LatticeArc, LatticeNode, LatticePath, LATTICE_ROOT};
pub use tree::{LexiconTree, NodeId, TreeNode, WordEnd};

//! Pivot sequences, their equivalence relations, the ordering matrix `M_O`,
//! and the generalized serial strategy classes.

mod classes;
mod equivalence;
mod permutation;
mod sequence;

use thiserror::Error;

pub use classes::{
    check_witness, enumerate_column_class, enumerate_cyclic, generate_class, generate_member, is_bar_column_serial,
    is_column_serial, recognize_class, recognize_with_witness, ChainShape, ClassKind, ClassMember, ClassWitness,
    GenerateOptions, SerialBase,
};
pub use equivalence::{
    admissible_transposition, are_equivalent, are_shift_equivalent, are_weak_equivalent, canonical_form,
    equivalent_by_search, weak_class_representatives, ChainLink, ChainRelation, WeakChain, MAX_SEARCH_BLOCKS,
};
pub use permutation::BlockPermutation;
pub use sequence::{ordering_matrix, OrderingMatrix, PivotSequence};

/// Errors raised by pivot-sequence operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrderingError {
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("a pivot sequence needs at least two blocks, got {0}")]
    TooFewBlocks(usize),
    #[error("a pivot sequence needs at least one pair")]
    Empty,
    #[error("pair ({i}, {j}) is invalid for {m} blocks")]
    InvalidPair { i: usize, j: usize, m: usize },
    #[error("pairs at positions {position} and {} share an index", position + 1)]
    NotAdmissible { position: usize },
    #[error("position {position} has no successor in a sequence of length {len}")]
    PositionOutOfRange { position: usize, len: usize },
    #[error("sequence is not cyclic")]
    NotCyclic,
    #[error("exhaustive search supports at most {max} blocks, got {m}")]
    UnsupportedSize { m: usize, max: usize },
    #[error("unknown strategy class {0:?}")]
    InvalidKind(String),
    #[error("cannot parse {0:?}")]
    Parse(String),
}

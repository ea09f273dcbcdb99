//! Grid points, index sets, tuples, finitely supported partial functions and
//! terms over named atoms.

mod index;
pub mod ops;
mod partial;
mod point;
pub mod term;
mod tuple;

pub use index::IndexSet;
pub use ops::{bar_extend, compose, disjoint_union, fiber, fibers, hash_fn, shrink_inner, star_fn, star_set};
pub use partial::{PartialFn, PointFn, TupleFn, Value};
pub use point::Point;
pub use term::{AtomClass, AtomEntry, Expr, Term, TermStats};
pub use tuple::MTuple;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("index set mismatch: expected {expected}, found {found}")]
    IndexMismatch { expected: IndexSet, found: IndexSet },
    #[error("index sets {left} and {right} overlap")]
    OverlappingIndices { left: IndexSet, right: IndexSet },
    #[error("{subset} is not a subset of {of}")]
    NotSubset { subset: IndexSet, of: IndexSet },
    #[error("domains overlap at {tuple}")]
    DomainCollision { tuple: MTuple },
    #[error("duplicate graph entry at {tuple}")]
    DuplicateEntry { tuple: MTuple },
    #[error("g disagrees with g′∘h′ at {tuple}")]
    NotContained { tuple: MTuple },
    #[error("domain tuple {tuple} lies outside the universe")]
    OutsideUniverse { tuple: MTuple },
    #[error("expected {expected} arguments, found {found}")]
    ArgumentCount { expected: usize, found: usize },
    #[error("unresolved atom `{0}`")]
    UnresolvedAtom(String),
    #[error("projection {index} out of range for arguments over {arity}")]
    ProjectionOutOfRange { index: usize, arity: IndexSet },
    #[error("atom `{0}` is defined twice with different contents")]
    AtomClash(String),
}

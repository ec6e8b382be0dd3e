//! Crate-wide error type.
//!
//! Every fallible operation returns one of these variants; none of them
//! carries floating-point data. Callers that want to distinguish "the input
//! is malformed" from "the input is fine but outside the supported class"
//! can match on the variant.

use thiserror::Error;

/// Errors produced by the kernel.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A term references a cell id that does not exist in the polygraph.
    #[error("no cell with id {0} in the polygraph")]
    NoSuchCell(u32),

    /// A composition `x #_k y` was requested but the `k`-target of `x` does
    /// not equal the `k`-source of `y`.
    #[error("boundary mismatch composing at level {level}: {detail}")]
    BoundaryMismatch { level: usize, detail: String },

    /// The operation requires a polygraph of a class (positive, regular)
    /// that the argument does not belong to.
    #[error("unsupported polygraph class: {0}")]
    UnsupportedClass(String),

    /// A pushout was requested along two legs neither of which is a
    /// polygraphic monomorphism.
    #[error("pushout requires at least one polygraphic monomorphism leg")]
    NotMono,

    /// A cell-set operation would leave the set of cells not closed under
    /// boundaries.
    #[error("cell set is not closed under boundaries: missing cell {0}")]
    ClosureViolation(u32),

    /// A linear element cannot be written as an arrow of the free category:
    /// its atom order has a cycle, or a coefficient is outside {0, 1} where
    /// a pasting shape is required.
    #[error("element is not representable as a composite: {0}")]
    NotSteinerRepresentable(String),

    /// An extracted composition term failed its round-trip certification.
    #[error("term extraction failed certification: {0}")]
    ExtractionFailed(String),

    /// An enumeration or iterated construction exceeded its documented
    /// bound.
    #[error("bound exceeded: {0}")]
    BoundExceeded(String),

    /// The marked cell of a horn is not a codimension-1 cell of the plex.
    #[error("marked cell {0} is not a codimension-1 cell of the plex")]
    NotACell(u32),

    /// A syntactic lifting had no decomposition, or more than one, matching
    /// the image factorization.
    #[error("syntactic lifting failed: {0}")]
    DecompositionMismatch(String),

    /// Two independent decision procedures for the same predicate returned
    /// different answers on the same input.
    #[error("independent methods disagree: {0}")]
    MethodDisagreement(String),

    /// An operation whose correctness depends on a checked hypothesis
    /// (such as preservation of sigma and alternate positivity) was called
    /// on input that fails the hypothesis.
    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),

    /// A family of projection endomorphisms does not satisfy the globular
    /// relations.
    #[error("globular relations violated: {0}")]
    GlobularRelationViolated(String),

    /// The polygraph failed structural validation.
    #[error("invalid polygraph: {0}")]
    InvalidPolygraph(String),

    /// The morphism failed structural validation.
    #[error("invalid morphism: {0}")]
    InvalidMorphism(String),

    /// Exact structural evaluation is implemented for arrows of dimension at
    /// most 3; higher cells are handled through their linear shadows.
    #[error("structural evaluation is limited to dimension 3, got {0}")]
    DimensionLimit(usize),

    /// Arithmetic was attempted between linear combinations expressed in
    /// different bases; callers must convert explicitly.
    #[error("linear combinations are in different bases")]
    BasisMismatch,

    /// Input could not be parsed or serialized.
    #[error("serialization: {0}")]
    Serde(String),
}

/// Convenient alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

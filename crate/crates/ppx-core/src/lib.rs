//! Exact computational kernel for the combinatorics of positive and regular
//! polygraphs.
//!
//! A polygraph presents a free strict infinity-category by generating cells:
//! each `n`-cell is attached along a source and a target `(n-1)`-arrow of the
//! free category on the cells below. This crate builds those free composites
//! explicitly, decides equality of arrows by classifying them into pasting
//! shapes (polyplexes), and layers an exact integer linearization on top: the
//! delta map sending an arrow to its cell-occurrence count, the
//! orientation-alternating invariant sigma, and the Steiner-style translation
//! between polygraphs, globular groups, chain complexes and double sequences.
//!
//! The main public surfaces are:
//!
//! - [`poly`]: cells, composition terms, polygraphs, morphisms, pushouts;
//! - [`value`]: evaluation of terms into canonical pasting values (dimension
//!   at most 3) and decidable arrow equality;
//! - [`lin`]: integer linear combinations over cells, delta, sigma, the
//!   triangular generator basis, positivity tests;
//! - [`plex`]: polyplex classification, sphericity, regularity, generic
//!   factorization and shape enumeration;
//! - [`group`]: globular groups, chain complexes, double sequences and the
//!   conversions between them;
//! - [`steiner`]: based chain complexes with atoms, tensor and cone
//!   constructions on polygraphs, globes, cubes and orientals;
//! - [`homotopy`]: generating cofibrations, horns, anodyne-pushout
//!   recognition, pushout products and cylinders;
//! - [`realize`]: the shape-chain realization of a polygraph as a
//!   semi-simplicial set, and the inverse oriental embedding;
//! - [`homology`]: exact integral homology via Smith normal form;
//! - [`verify`]: the pinned acceptance computations used by the test suite
//!   and the `ppx verify-paper` command.
//!
//! All arithmetic is exact; every comparison in the crate is an equality of
//! integers or of canonical encodings. There are no tolerances.

pub mod error;
pub mod group;
pub mod homology;
pub mod homotopy;
pub mod json;
pub mod lin;
pub mod plex;
pub mod poly;
pub mod realize;
pub mod steiner;
pub mod value;

pub use error::{Error, Result};
pub use lin::{Basis, LinComb};
pub use plex::{EnumKind, Polyplex};
pub use poly::{Cell, CellId, ClassTag, Morphism, Polygraph, Sign, SubPolygraph, Term};

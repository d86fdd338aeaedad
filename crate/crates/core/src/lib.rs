//! splforge — incremental construction of software product lines from
//! product variants.
//!
//! The crate turns a set of related single products (written in MiniJ, a
//! Java-like mini-language) into one product line, one product at a time:
//!
//! 1. [`minilang`] parses each source file and prints canonical text.
//! 2. [`artefact`] names every parse-tree node with a content-derived,
//!    position-independent identifier and mirrors the tree as an
//!    artefact tree.
//! 3. [`integration`] merges each product's artefact trees into the
//!    repository's super-trees by longest-common-subsequence alignment;
//!    nothing is ever deleted, so earlier products keep regenerating
//!    exactly.
//! 4. [`fca`] derives an attribute/object concept poset from the
//!    product-by-artefact matrix, and [`variability`] turns it into
//!    artefact- and feature-level variability models with implication and
//!    mutual-exclusion constraints.
//! 5. [`codegen`] renders the annotated 150% code base (with conditional-
//!    compilation style `//#if` directives) and generates concrete
//!    products from feature selections or artefact configurations.
//! 6. [`validation`] round-trips every integrated product and scores the
//!    regeneration with a representation-error metric over an AST diff.
//! 7. [`corpus`] synthesizes whole product families from compact family
//!    specs, for fixtures, randomized testing, and benchmarks.

pub mod artefact;
pub mod codegen;
pub mod corpus;
pub mod error;
pub mod fca;
pub mod integration;
pub mod minilang;
pub mod validation;
pub mod variability;

pub use error::{Result, SplError};

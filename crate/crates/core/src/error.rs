//! Error type shared by every module of the crate.
//!
//! All fallible operations return [`SplError`] through the crate-wide
//! [`Result`] alias. Variants are deliberately specific: callers (the CLI in
//! particular) map them to exit codes and user-facing messages, and tests
//! assert on them directly.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, SplError>;

/// Every error the library can produce.
#[derive(Debug, Error)]
pub enum SplError {
    /// The mini-language source could not be parsed.
    #[error("syntax error in {path} at {line}:{column}: {message}")]
    Syntax {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    /// A source path failed validation (absolute, empty, `..` segments, ...).
    #[error("invalid source path {0:?}")]
    InvalidPath(String),

    /// A product supplied two files with the same path.
    #[error("duplicate file path in product: {0}")]
    DuplicateFile(String),

    /// A product with this name was already integrated.
    #[error("duplicate product name: {0}")]
    DuplicateProductName(String),

    /// A product must declare at least one feature.
    #[error("product {0} declares no features")]
    EmptyFeatureList(String),

    /// Two distinct artefact values hashed to the same identifier.
    #[error("internal id collision on {id}: {existing:?} vs {incoming:?}")]
    InternalCollision {
        id: String,
        existing: String,
        incoming: String,
    },

    /// A formal context with no objects cannot produce a poset.
    #[error("formal context has no objects")]
    EmptyContext,

    /// Variability models require at least one integrated product.
    #[error("repository has no integrated products")]
    EmptyRepository,

    /// A trace table referenced a group absent from the current model.
    #[error("unknown artefact group: {0}")]
    UnknownGroup(String),

    /// A feature name is not declared by any integrated product.
    #[error("unknown feature: {0}")]
    UnknownFeature(String),

    /// An artefact configuration referenced an id absent from the repository.
    #[error("unknown artefact id: {0}")]
    UnknownArtefactId(String),

    /// An artefact was selected without its parent.
    #[error("artefact {child} selected without its parent {parent}")]
    OrphanSelection { child: String, parent: String },

    /// Validation was asked to score a product with no printable lines.
    #[error("product {0} has no printable lines")]
    EmptyProduct(String),

    /// Two fragments landed on the same anchor slot during synthesis.
    #[error("fragment collision in {file} at anchor {anchor}, order {order}")]
    FragmentCollision {
        file: String,
        anchor: String,
        order: i64,
    },

    /// A family spec is internally inconsistent (bad anchor, bad feature...).
    #[error("invalid family spec: {0}")]
    InvalidFamily(String),

    /// Round-trip validation found products that did not reproduce.
    #[error("validation failed: {0}")]
    Validation(String),

    /// The on-disk repository is missing files or contains garbage.
    #[error("repository layout error: {0}")]
    Store(String),

    /// Another process holds the repository lock.
    #[error("repository at {0} is locked by another process")]
    RepositoryLocked(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

//! Parser and canonical printer for MiniJ, the Java-like mini-language that
//! product variants are written in.
//!
//! MiniJ keeps just enough of Java to exercise structural merging: imports,
//! a single class per compilation unit, fields, methods with parameters, and
//! bodies made of `if`/`while`/`for`/`return`/expression statements. All
//! control flow requires braces, and expressions are *not* parsed into
//! trees — an expression is a balanced run of tokens, normalized to
//! single-space separation. Two sources that differ only in layout or
//! comments therefore produce identical trees, while string literals are
//! preserved byte-exactly.
//!
//! [`print`] renders a tree in the canonical form used everywhere else in
//! the crate (one statement per line, four-space indentation, `else` on its
//! own line). `parse` and `print` are mutually idempotent: printing a parsed
//! tree and reparsing it yields the same tree.

mod lexer;
mod parser;
mod printer;

pub use parser::parse;
pub use printer::print;

pub(crate) use printer::{close_line, else_open_line, indent, line_span, open_line};

use serde::{Deserialize, Serialize};

/// The twelve syntactic categories of MiniJ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    CompilationUnit,
    Import,
    ClassDecl,
    FieldDecl,
    MethodDecl,
    Param,
    Block,
    IfStmt,
    WhileStmt,
    ForStmt,
    ExprStmt,
    ReturnStmt,
}

impl NodeKind {
    /// Statement kinds: the only kinds that participate in twin numbering
    /// and duplication, because only statements live in ordered sequences
    /// where the same value may legitimately recur.
    pub fn is_statement(self) -> bool {
        matches!(
            self,
            NodeKind::IfStmt
                | NodeKind::WhileStmt
                | NodeKind::ForStmt
                | NodeKind::ExprStmt
                | NodeKind::ReturnStmt
        )
    }

    /// Kinds whose children form an ordered statement sequence and are
    /// therefore merged by super-sequence alignment rather than as a set.
    pub fn has_sequenced_children(self) -> bool {
        matches!(
            self,
            NodeKind::Block | NodeKind::IfStmt | NodeKind::WhileStmt | NodeKind::ForStmt
        )
    }
}

/// A node of the parse tree.
///
/// `text` is the normalized token text associated with the node: the full
/// header for declarations and control-flow statements (`if ( x < 3 )`),
/// the full statement including the trailing `;` for leaf statements, and
/// the empty string (or `else`) for blocks. Children appear in source
/// order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AstNode {
    pub kind: NodeKind,
    pub text: String,
    pub children: Vec<AstNode>,
}

impl AstNode {
    pub(crate) fn new(kind: NodeKind, text: impl Into<String>) -> Self {
        AstNode {
            kind,
            text: text.into(),
            children: Vec::new(),
        }
    }

    /// Total number of nodes in this subtree, including `self`.
    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(AstNode::node_count).sum::<usize>()
    }
}

/// A named source file, the unit handed to parsing and integration.
///
/// Paths are repository-relative with forward slashes; construction rejects
/// absolute paths, `..` segments, backslashes, and empty components so that
/// the same path string can safely serve as a map key and a file name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFile {
    pub path: String,
    pub text: String,
}

impl SourceFile {
    pub fn new(path: impl Into<String>, text: impl Into<String>) -> crate::Result<Self> {
        let path = path.into();
        let valid = !path.is_empty()
            && !path.starts_with('/')
            && !path.contains('\\')
            && !path.chars().any(|c| c.is_control())
            && path.split('/').all(|seg| !seg.is_empty() && seg != "..");
        if !valid {
            return Err(crate::SplError::InvalidPath(path));
        }
        Ok(SourceFile {
            path,
            text: text.into(),
        })
    }
}

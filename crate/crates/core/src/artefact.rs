//! Artefact trees: parse trees whose nodes carry stable, content-derived
//! identities.
//!
//! An artefact's identity has three layers:
//!
//! * **base** — a 64-bit FNV-1a hash of the node's value chained with the
//!   full rendered id of its parent (and, for statements, the twin
//!   number). Identity therefore encodes *what* the node is and *where*
//!   in the containment hierarchy it lives, but not its position among
//!   siblings — moving a statement within its block does not change its
//!   id.
//! * **twin** — repeated equal statements under one parent are numbered
//!   1, 2, ... in source order, so `msg += " ";` appearing twice in one
//!   body yields two distinct artefacts.
//! * **dup** — merging may be forced to keep two copies of the same
//!   (base, twin) at different positions of a super-tree sequence; copies
//!   are distinguished by a duplicate number assigned at merge time.
//!   Identification itself always produces dup = 1.
//!
//! Rendered ids look like `A1f3a...` with `_t<k>` and `_d<k>` suffixes
//! when twin or dup exceed 1.

use std::collections::BTreeSet;
use std::fmt;

use crate::minilang::{AstNode, NodeKind};

/// FNV-1a 64-bit offset basis.
pub const FNV_OFFSET: u64 = 0xcbf29ce484222325;
/// FNV-1a 64-bit prime.
pub const FNV_PRIME: u64 = 0x100000001b3;

/// FNV-1a hash of a byte string. This is the only hash used for artefact
/// identity; it is stable across platforms and runs.
pub fn content_hash(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Separator between hash-input fields; cannot occur in normalized values.
const SEP: u8 = 0x1f;

/// Hash input for a child artefact: value, parent rendered id and (for
/// statement kinds) the twin number, joined by an unambiguous separator.
pub(crate) fn child_base(kind: NodeKind, value: &str, parent_rendered: &str, twin: u32) -> u64 {
    let mut buf = Vec::with_capacity(value.len() + parent_rendered.len() + 8);
    buf.extend_from_slice(value.as_bytes());
    buf.push(SEP);
    buf.extend_from_slice(parent_rendered.as_bytes());
    if kind.is_statement() {
        buf.push(SEP);
        buf.extend_from_slice(twin.to_string().as_bytes());
    }
    content_hash(&buf)
}

/// The three-layer artefact identity. Ordering and equality consider all
/// three layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArtefactId {
    pub base: u64,
    pub twin: u32,
    pub dup: u32,
}

impl ArtefactId {
    pub fn new(base: u64) -> Self {
        ArtefactId {
            base,
            twin: 1,
            dup: 1,
        }
    }

    /// Canonical textual form: `A<16 hex digits>` plus `_t<twin>` when
    /// twin > 1 and `_d<dup>` when dup > 1.
    pub fn rendered(&self) -> String {
        let mut s = format!("A{:016x}", self.base);
        if self.twin > 1 {
            s.push_str(&format!("_t{}", self.twin));
        }
        if self.dup > 1 {
            s.push_str(&format!("_d{}", self.dup));
        }
        s
    }

    /// Parse a rendered id back into its layers.
    pub fn parse(text: &str) -> Option<ArtefactId> {
        let rest = text.strip_prefix('A')?;
        if rest.len() < 16 {
            return None;
        }
        let (hex, mut suffix) = rest.split_at(16);
        if !hex.chars().all(|c| c.is_ascii_hexdigit() && !c.is_ascii_uppercase()) {
            return None;
        }
        let base = u64::from_str_radix(hex, 16).ok()?;
        let mut id = ArtefactId::new(base);
        if let Some(t) = suffix.strip_prefix("_t") {
            let digits: String = t.chars().take_while(|c| c.is_ascii_digit()).collect();
            id.twin = digits.parse().ok().filter(|&v| v > 1)?;
            suffix = &t[digits.len()..];
        }
        if let Some(d) = suffix.strip_prefix("_d") {
            id.dup = d.parse().ok().filter(|&v| v > 1)?;
            suffix = "";
        }
        if !suffix.is_empty() {
            return None;
        }
        Some(id)
    }
}

impl fmt::Display for ArtefactId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.rendered())
    }
}

/// One node of an artefact tree: identity, syntax, and provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artefact {
    pub id: ArtefactId,
    pub kind: NodeKind,
    pub value: String,
    pub children: Vec<Artefact>,
    /// Names of the products this artefact appears in. Empty right after
    /// identification; integration records provenance.
    pub origin: BTreeSet<String>,
}

impl Artefact {
    /// Total number of artefacts in this subtree.
    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(Artefact::node_count).sum::<usize>()
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Artefact)) {
        f(self);
        for child in &self.children {
            child.walk(f);
        }
    }

    /// Rendered ids of the whole subtree.
    pub fn subtree_ids(&self) -> BTreeSet<String> {
        let mut ids = BTreeSet::new();
        self.walk(&mut |a| {
            ids.insert(a.id.rendered());
        });
        ids
    }

    /// Convert back into a plain parse tree (dropping identity), e.g. for
    /// canonical printing. The compilation-unit value (the path) maps back
    /// to the empty unit text.
    pub fn to_ast(&self) -> AstNode {
        AstNode {
            kind: self.kind,
            text: if self.kind == NodeKind::CompilationUnit {
                String::new()
            } else {
                self.value.clone()
            },
            children: self.children.iter().map(Artefact::to_ast).collect(),
        }
    }
}

/// An identified source file: the artefact mirror of one compilation unit.
/// The root artefact's value is the file path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtefactTree {
    pub path: String,
    pub root: Artefact,
}

/// Assign artefact identities to a parse tree.
///
/// Identification is deterministic and position-independent: the id of a
/// node depends only on its own normalized value, its chain of ancestors,
/// and how many equal-valued statements precede it under the same parent.
pub fn identify(unit: &AstNode, path: &str) -> ArtefactTree {
    debug_assert_eq!(unit.kind, NodeKind::CompilationUnit);
    let root_id = ArtefactId::new(content_hash(path.as_bytes()));
    let root = Artefact {
        id: root_id,
        kind: NodeKind::CompilationUnit,
        value: path.to_string(),
        children: identify_children(unit, &root_id.rendered()),
        origin: BTreeSet::new(),
    };
    ArtefactTree {
        path: path.to_string(),
        root,
    }
}

fn identify_children(parent: &AstNode, parent_rendered: &str) -> Vec<Artefact> {
    let mut out = Vec::with_capacity(parent.children.len());
    for (index, child) in parent.children.iter().enumerate() {
        let twin = if child.kind.is_statement() {
            1 + parent.children[..index]
                .iter()
                .filter(|sib| sib.kind == child.kind && sib.text == child.text)
                .count() as u32
        } else {
            1
        };
        let id = ArtefactId {
            base: child_base(child.kind, &child.text, parent_rendered, twin),
            twin,
            dup: 1,
        };
        out.push(Artefact {
            id,
            kind: child.kind,
            value: child.text.clone(),
            children: identify_children(child, &id.rendered()),
            origin: BTreeSet::new(),
        });
    }
    out
}

//! Merging one product's artefact tree into a repository super-tree.
//!
//! Merging is strictly additive. Matched artefacts gain provenance;
//! unmatched product artefacts are inserted, re-identified against their
//! super-tree parent (whose rendered id may carry duplicate suffixes the
//! product side has never seen). Children merge according to their
//! parent's kind:
//!
//! * compilation units and classes merge as sets keyed by identity —
//!   member order is presentation, not meaning — with new imports joining
//!   the import segment and other newcomers appended;
//! * method parameters pair positionally (the header text already proved
//!   them equal);
//! * statement sequences merge by super-sequence alignment, minting
//!   duplicate numbers when the same (base, twin) identity is forced to
//!   appear at a second position.

use std::collections::{BTreeMap, BTreeSet};

use super::sequence::lcs_pairs;
use crate::artefact::{child_base, Artefact, ArtefactId};
use crate::minilang::NodeKind;
use crate::{Result, SplError};

/// Merge `prod` (a freshly identified product tree) into the super-tree
/// rooted at `spl` for the same path. Every artefact the product touches —
/// matched or inserted — has its rendered id added to `config`.
pub(crate) fn merge_tree(
    spl: &mut Artefact,
    prod: &Artefact,
    product: &str,
    config: &mut BTreeSet<String>,
) -> Result<()> {
    debug_assert_eq!(spl.kind, NodeKind::CompilationUnit);
    debug_assert_eq!(spl.value, prod.value);
    merge_into(spl, prod, product, config)
}

/// Claim an entire new tree for `product`: ids are already in final
/// coordinates (the parent chain is identical), so only provenance and the
/// configuration need recording.
pub(crate) fn adopt_tree(node: &mut Artefact, product: &str, config: &mut BTreeSet<String>) {
    node.origin.insert(product.to_string());
    config.insert(node.id.rendered());
    for child in &mut node.children {
        adopt_tree(child, product, config);
    }
}

fn merge_into(
    spl: &mut Artefact,
    prod: &Artefact,
    product: &str,
    config: &mut BTreeSet<String>,
) -> Result<()> {
    spl.origin.insert(product.to_string());
    config.insert(spl.id.rendered());
    match spl.kind {
        NodeKind::CompilationUnit | NodeKind::ClassDecl => {
            merge_set_children(spl, prod, product, config)
        }
        NodeKind::MethodDecl => {
            debug_assert_eq!(spl.children.len(), prod.children.len());
            for (s, p) in spl.children.iter_mut().zip(&prod.children) {
                merge_into(s, p, product, config)?;
            }
            Ok(())
        }
        NodeKind::Block | NodeKind::IfStmt | NodeKind::WhileStmt | NodeKind::ForStmt => {
            merge_sequenced_children(spl, prod, product, config)
        }
        NodeKind::Import
        | NodeKind::FieldDecl
        | NodeKind::Param
        | NodeKind::ExprStmt
        | NodeKind::ReturnStmt => Ok(()),
    }
}

/// Unordered merge for unit and class children. Identity decides matching;
/// printing order is first-seen order, with new imports kept ahead of the
/// class declarations.
fn merge_set_children(
    spl: &mut Artefact,
    prod: &Artefact,
    product: &str,
    config: &mut BTreeSet<String>,
) -> Result<()> {
    let parent_rendered = spl.id.rendered();
    let keys: Vec<(u64, u32)> = prod
        .children
        .iter()
        .map(|c| {
            (
                child_base(c.kind, &c.value, &parent_rendered, c.id.twin),
                c.id.twin,
            )
        })
        .collect();
    for (i, pchild) in prod.children.iter().enumerate() {
        let position = |children: &[Artefact], key: (u64, u32)| {
            children
                .iter()
                .position(|c| c.id.base == key.0 && c.id.twin == key.1)
        };
        match position(&spl.children, keys[i]) {
            Some(at) => {
                let target = &mut spl.children[at];
                check_match(target, pchild)?;
                merge_into(target, pchild, product, config)?;
            }
            None => {
                // New member: place it before its next sibling that is
                // already in the super-tree, so each product's own member
                // order survives pruning. No such anchor means append.
                let node = insert_fresh(pchild, &parent_rendered, 1, product, config);
                let at = keys[i + 1..]
                    .iter()
                    .find_map(|&key| position(&spl.children, key))
                    .unwrap_or(spl.children.len());
                spl.children.insert(at, node);
            }
        }
    }
    Ok(())
}

/// Ordered merge for statement sequences (and if/while/for bodies):
/// super-sequence alignment over (base, twin) keys with value verification
/// at anchors, inserting the product's unmatched run after the super-tree's
/// within each gap. Inserted statements whose identity already occurs in
/// the sequence receive the next free duplicate number.
fn merge_sequenced_children(
    spl: &mut Artefact,
    prod: &Artefact,
    product: &str,
    config: &mut BTreeSet<String>,
) -> Result<()> {
    let parent_rendered = spl.id.rendered();
    let spl_keys: Vec<(u64, u32)> = spl
        .children
        .iter()
        .map(|c| (c.id.base, c.id.twin))
        .collect();
    let prod_keys: Vec<(u64, u32)> = prod
        .children
        .iter()
        .map(|c| {
            (
                child_base(c.kind, &c.value, &parent_rendered, c.id.twin),
                c.id.twin,
            )
        })
        .collect();
    let anchors = lcs_pairs(&spl_keys, &prod_keys);

    let mut next_dup: BTreeMap<(u64, u32), u32> = BTreeMap::new();
    for child in &spl.children {
        let slot = next_dup.entry((child.id.base, child.id.twin)).or_insert(1);
        *slot = (*slot).max(child.id.dup + 1);
    }
    let mut take_dup = |key: (u64, u32)| -> u32 {
        let slot = next_dup.entry(key).or_insert(1);
        let dup = *slot;
        *slot += 1;
        dup
    };

    let mut slots: Vec<Option<Artefact>> = std::mem::take(&mut spl.children)
        .into_iter()
        .map(Some)
        .collect();
    let mut out: Vec<Artefact> = Vec::with_capacity(slots.len() + prod.children.len());
    let keep_spl = |range: std::ops::Range<usize>, out: &mut Vec<Artefact>,
                    slots: &mut Vec<Option<Artefact>>| {
        for slot in &mut slots[range] {
            out.push(slot.take().expect("super-tree child consumed twice"));
        }
    };

    let (first_i, first_j) = anchors
        .first()
        .copied()
        .unwrap_or((slots.len(), prod.children.len()));
    keep_spl(0..first_i, &mut out, &mut slots);
    for pchild in &prod.children[..first_j] {
        let key = (
            child_base(pchild.kind, &pchild.value, &parent_rendered, pchild.id.twin),
            pchild.id.twin,
        );
        out.push(insert_fresh(pchild, &parent_rendered, take_dup(key), product, config));
    }
    for (k, &(i, j)) in anchors.iter().enumerate() {
        let mut anchor = slots[i].take().expect("anchor consumed twice");
        check_match(&anchor, &prod.children[j])?;
        merge_into(&mut anchor, &prod.children[j], product, config)?;
        out.push(anchor);
        let (next_i, next_j) = anchors
            .get(k + 1)
            .copied()
            .unwrap_or((slots.len(), prod.children.len()));
        keep_spl(i + 1..next_i, &mut out, &mut slots);
        for pchild in &prod.children[j + 1..next_j] {
            let key = (
                child_base(pchild.kind, &pchild.value, &parent_rendered, pchild.id.twin),
                pchild.id.twin,
            );
            out.push(insert_fresh(pchild, &parent_rendered, take_dup(key), product, config));
        }
    }
    spl.children = out;
    Ok(())
}

/// Re-identify a product subtree under a super-tree parent and claim it.
/// The root of the subtree may carry a minted duplicate number; descendants
/// always start at dup = 1 because they arrive as a complete fresh sibling
/// list.
fn insert_fresh(
    node: &Artefact,
    parent_rendered: &str,
    dup: u32,
    product: &str,
    config: &mut BTreeSet<String>,
) -> Artefact {
    let id = ArtefactId {
        base: child_base(node.kind, &node.value, parent_rendered, node.id.twin),
        twin: node.id.twin,
        dup,
    };
    let rendered = id.rendered();
    config.insert(rendered.clone());
    let children = node
        .children
        .iter()
        .map(|c| insert_fresh(c, &rendered, 1, product, config))
        .collect();
    Artefact {
        id,
        kind: node.kind,
        value: node.value.clone(),
        children,
        origin: std::iter::once(product.to_string()).collect(),
    }
}

/// Matched identities must agree on kind and value; disagreement means the
/// 64-bit content hash collided, which must surface rather than silently
/// corrupt the repository.
fn check_match(spl: &Artefact, prod: &Artefact) -> Result<()> {
    if spl.kind != prod.kind || spl.value != prod.value {
        return Err(SplError::InternalCollision {
            id: spl.id.rendered(),
            existing: spl.value.clone(),
            incoming: prod.value.clone(),
        });
    }
    Ok(())
}

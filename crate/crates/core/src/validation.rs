//! Round-trip validation: regenerate every integrated product and score
//! the regeneration.
//!
//! The protocol is: integrate a whole family into a fresh repository,
//! regenerate each product from its stored artefact configuration, and
//! structurally diff the regeneration against the canonically formatted
//! original. The score is the representation error
//!
//! ```text
//! rep_err = 100 × modified lines / total lines of the original
//! ```
//!
//! The diff works on ASTs, never on raw text, so formatting cannot
//! contribute. It counts four kinds of edits — insertions, deletions,
//! updates, and moves — and, like the reference protocol, only counts
//! moves that affect statements: reordered class members or imports are
//! not edits, because member order carries no meaning in the merged
//! super-tree.

use std::collections::BTreeMap;

use crate::codegen::generate_product_by_artefacts;
use crate::integration::store::csv_field;
use crate::integration::{Product, SplRepository};
use crate::minilang::{line_span, parse, AstNode, NodeKind, SourceFile};
use crate::{Result, SplError};

/// Edit counts from a structural product diff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DiffReport {
    /// Nodes present only in the regenerated product.
    pub insertions: usize,
    /// Nodes present only in the original product.
    pub deletions: usize,
    /// Matched nodes whose text differs.
    pub updates: usize,
    /// Statements appearing out of order relative to the original.
    pub statement_moves: usize,
    /// Printed lines touched by any counted edit, each once.
    pub modified_loc: usize,
    /// Canonical line count of the original product.
    pub total_loc_original: usize,
}

impl DiffReport {
    pub fn is_clean(&self) -> bool {
        self.insertions == 0
            && self.deletions == 0
            && self.updates == 0
            && self.statement_moves == 0
            && self.modified_loc == 0
    }
}

/// Structurally diff two products given as file sets.
pub fn ast_diff(original: &[SourceFile], regenerated: &[SourceFile]) -> Result<DiffReport> {
    let mut report = DiffReport::default();
    let parse_all = |files: &[SourceFile]| -> Result<BTreeMap<String, AstNode>> {
        files
            .iter()
            .map(|f| Ok((f.path.clone(), parse(f)?)))
            .collect()
    };
    let old = parse_all(original)?;
    let new = parse_all(regenerated)?;

    for unit in old.values() {
        report.total_loc_original += line_span(unit);
    }
    for (path, old_unit) in &old {
        match new.get(path) {
            Some(new_unit) => diff_nodes(old_unit, new_unit, &mut report),
            None => {
                report.deletions += old_unit.node_count();
                report.modified_loc += line_span(old_unit);
            }
        }
    }
    for (path, new_unit) in &new {
        if !old.contains_key(path) {
            report.insertions += new_unit.node_count();
            report.modified_loc += line_span(new_unit);
        }
    }
    Ok(report)
}

/// Diff a matched node pair: score a text change, then align children —
/// in order where order is meaningful (statement lists), as a set
/// everywhere else.
fn diff_nodes(old: &AstNode, new: &AstNode, report: &mut DiffReport) {
    debug_assert_eq!(old.kind, new.kind);
    if old.text != new.text {
        report.updates += 1;
        report.modified_loc += 1;
    }
    if old.kind == NodeKind::Block {
        diff_sequence(&old.children, &new.children, report);
    } else {
        diff_set(&old.children, &new.children, report);
    }
}

fn key(node: &AstNode) -> (NodeKind, &str) {
    (node.kind, node.text.as_str())
}

/// Unordered alignment: equal (kind, text) nodes pair without cost in any
/// order; leftovers of the same kind pair positionally as updates; the
/// rest are insertions/deletions weighted by subtree size.
fn diff_set(old: &[AstNode], new: &[AstNode], report: &mut DiffReport) {
    let mut new_taken = vec![false; new.len()];
    let mut old_unmatched = Vec::new();
    for o in old {
        let slot = new
            .iter()
            .enumerate()
            .position(|(j, n)| !new_taken[j] && key(n) == key(o));
        match slot {
            Some(j) => {
                new_taken[j] = true;
                diff_nodes(o, &new[j], report);
            }
            None => old_unmatched.push(o),
        }
    }
    let mut new_unmatched: Vec<&AstNode> = new
        .iter()
        .zip(&new_taken)
        .filter(|(_, taken)| !**taken)
        .map(|(n, _)| n)
        .collect();

    pair_leftovers(old_unmatched, &mut new_unmatched, report);
}

/// Ordered alignment for statement lists: the longest common subsequence
/// of (kind, text) keys pairs for free; equal keys off the backbone are
/// moves; the rest fall back to update/insert/delete as in sets.
fn diff_sequence(old: &[AstNode], new: &[AstNode], report: &mut DiffReport) {
    let old_keys: Vec<_> = old.iter().map(key).collect();
    let new_keys: Vec<_> = new.iter().map(key).collect();
    let anchors = crate::integration::lcs_pairs(&old_keys, &new_keys);

    let mut old_matched = vec![false; old.len()];
    let mut new_matched = vec![false; new.len()];
    for &(i, j) in &anchors {
        old_matched[i] = true;
        new_matched[j] = true;
        diff_nodes(&old[i], &new[j], report);
    }
    // Equal nodes not on the backbone have changed relative position.
    let mut old_unmatched = Vec::new();
    for (i, o) in old.iter().enumerate() {
        if old_matched[i] {
            continue;
        }
        let slot = new
            .iter()
            .enumerate()
            .position(|(j, n)| !new_matched[j] && key(n) == key(o));
        match slot {
            Some(j) => {
                new_matched[j] = true;
                if o.kind.is_statement() {
                    report.statement_moves += 1;
                    report.modified_loc += line_span(o);
                }
                diff_nodes(o, &new[j], report);
            }
            None => old_unmatched.push(o),
        }
    }
    let mut new_unmatched: Vec<&AstNode> = new
        .iter()
        .zip(&new_matched)
        .filter(|(_, matched)| !**matched)
        .map(|(n, _)| n)
        .collect();

    pair_leftovers(old_unmatched, &mut new_unmatched, report);
}

/// Unpaired nodes: same-kind pairs in order are updates, the remainder
/// deletions (old side) or insertions (new side).
fn pair_leftovers(old: Vec<&AstNode>, new: &mut Vec<&AstNode>, report: &mut DiffReport) {
    for o in old {
        let slot = new.iter().position(|n| n.kind == o.kind);
        match slot {
            Some(j) => {
                let n = new.remove(j);
                diff_nodes(o, n, report);
            }
            None => {
                report.deletions += o.node_count();
                report.modified_loc += line_span(o);
            }
        }
    }
    for n in new.drain(..) {
        report.insertions += n.node_count();
        report.modified_loc += line_span(n);
    }
}

/// Representation error of `report` in percent. `product` names the
/// product in the error when the original has no lines.
pub fn rep_err(report: &DiffReport, product: &str) -> Result<f64> {
    if report.total_loc_original == 0 {
        return Err(SplError::EmptyProduct(product.to_string()));
    }
    Ok(100.0 * report.modified_loc as f64 / report.total_loc_original as f64)
}

/// One product's round-trip outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundTripEntry {
    pub name: String,
    pub report: DiffReport,
    pub rep_err: f64,
}

/// Integrate `products` into a fresh repository in the given order, then
/// regenerate each one from its stored artefact configuration and diff it
/// against the canonically formatted original.
pub fn round_trip(products: &[Product]) -> Result<Vec<RoundTripEntry>> {
    round_trip_with(&mut SplRepository::new("round-trip"), products)
}

/// [`round_trip`] into a caller-supplied repository, which afterwards
/// holds the whole family.
pub fn round_trip_with(
    repo: &mut SplRepository,
    products: &[Product],
) -> Result<Vec<RoundTripEntry>> {
    for product in products {
        repo.integrate(product)?;
    }
    let mut entries = Vec::new();
    for product in products {
        let config = repo
            .product(&product.name)
            .expect("integrated above")
            .configuration
            .clone();
        let regenerated = generate_product_by_artefacts(repo, &config)?;
        let report = ast_diff(&product.files, &regenerated)?;
        let rep_err = rep_err(&report, &product.name)?;
        entries.push(RoundTripEntry {
            name: product.name.clone(),
            report,
            rep_err,
        });
    }
    Ok(entries)
}

/// Render round-trip results as CSV.
pub fn report_csv(entries: &[RoundTripEntry]) -> String {
    let mut out =
        String::from("product,insertions,deletions,updates,statementMoves,modifiedLoc,totalLoc,repErr\n");
    for e in entries {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{:.4}\n",
            csv_field(&e.name),
            e.report.insertions,
            e.report.deletions,
            e.report.updates,
            e.report.statement_moves,
            e.report.modified_loc,
            e.report.total_loc_original,
            e.rep_err
        ));
    }
    out
}

//! Formal concept analysis over product-by-attribute contexts.
//!
//! A formal context relates objects (products) to attributes (artefact
//! ids or feature names). From the context this module builds the
//! AOC-poset — the subset of the concept lattice containing only concepts
//! that *introduce* an attribute or an object — and extracts the
//! variability constraints the rest of the crate consumes:
//!
//! * the **common** attributes (introduced by the concept whose extent is
//!   every object),
//! * **co-occurrence groups** — the partition of the remaining attributes
//!   by identical extent (attributes that always appear together),
//! * **implications** between groups (strict extent inclusion, stored
//!   transitively reduced),
//! * **mutual exclusions** between groups (disjoint extents).
//!
//! Everything is deterministic: concepts are numbered by descending
//! extent size with lexicographic tie-breaks, and all derived lists are
//! sorted.

use std::collections::{BTreeMap, BTreeSet};

use crate::{Result, SplError};

/// A binary relation between named objects and named attributes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalContext {
    pub objects: Vec<String>,
    pub attributes: Vec<String>,
    /// Row per object: indices of the attributes it has.
    rows: Vec<BTreeSet<usize>>,
}

impl FormalContext {
    /// Build a context from a membership predicate over index pairs.
    pub fn from_fn(
        objects: Vec<String>,
        attributes: Vec<String>,
        mut has: impl FnMut(usize, usize) -> bool,
    ) -> Self {
        let rows = (0..objects.len())
            .map(|o| (0..attributes.len()).filter(|&a| has(o, a)).collect())
            .collect();
        FormalContext {
            objects,
            attributes,
            rows,
        }
    }

    pub fn has(&self, object: usize, attribute: usize) -> bool {
        self.rows[object].contains(&attribute)
    }

    /// Objects that carry `attribute` (the attribute's extent).
    pub fn attribute_extent(&self, attribute: usize) -> BTreeSet<usize> {
        (0..self.objects.len())
            .filter(|&o| self.rows[o].contains(&attribute))
            .collect()
    }

    /// Attributes carried by `object` (the object's intent).
    pub fn object_intent(&self, object: usize) -> &BTreeSet<usize> {
        &self.rows[object]
    }
}

/// A formal concept restricted to what the AOC-poset needs: its extent and
/// intent plus the attributes/objects it introduces (those whose
/// attribute- or object-concept this is).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Concept {
    pub extent: BTreeSet<usize>,
    pub intent: BTreeSet<usize>,
    pub introduced_attributes: BTreeSet<usize>,
    pub introduced_objects: BTreeSet<usize>,
}

/// The attribute-object-concept poset: introducer concepts ordered by
/// extent inclusion, edges transitively reduced (child, parent).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AocPoset {
    pub concepts: Vec<Concept>,
    /// `(i, j)` means concepts[i].extent ⊂ concepts[j].extent with nothing
    /// in between.
    pub edges: Vec<(usize, usize)>,
}

/// Build the AOC-poset of `context`.
///
/// Attributes held by no object cannot arise from a product matrix and are
/// skipped rather than being given an artificial bottom concept.
pub fn build_aoc_poset(context: &FormalContext) -> Result<AocPoset> {
    if context.objects.is_empty() {
        return Err(SplError::EmptyContext);
    }
    let n_attrs = context.attributes.len();
    let attr_extents: Vec<BTreeSet<usize>> =
        (0..n_attrs).map(|a| context.attribute_extent(a)).collect();

    // Object-concept extent of o: all objects whose intent contains o's.
    let object_closures: Vec<BTreeSet<usize>> = (0..context.objects.len())
        .map(|o| {
            (0..context.objects.len())
                .filter(|&p| context.rows[o].is_subset(&context.rows[p]))
                .collect()
        })
        .collect();

    let mut extents: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
    for (a, extent) in attr_extents.iter().enumerate() {
        debug_assert_eq!(*extent, context.attribute_extent(a));
        if !extent.is_empty() {
            extents.insert(extent.clone());
        }
    }
    for closure in &object_closures {
        extents.insert(closure.clone());
    }

    let mut concepts: Vec<Concept> = extents
        .into_iter()
        .map(|extent| {
            let intent: BTreeSet<usize> = (0..n_attrs)
                .filter(|&a| extent.is_subset(&attr_extents[a]))
                .collect();
            let introduced_attributes: BTreeSet<usize> = (0..n_attrs)
                .filter(|&a| attr_extents[a] == extent)
                .collect();
            let introduced_objects: BTreeSet<usize> = (0..context.objects.len())
                .filter(|&o| object_closures[o] == extent)
                .collect();
            Concept {
                extent,
                intent,
                introduced_attributes,
                introduced_objects,
            }
        })
        .collect();
    concepts.sort_by(|x, y| {
        y.extent
            .len()
            .cmp(&x.extent.len())
            .then_with(|| x.extent.cmp(&y.extent))
            .then_with(|| x.intent.cmp(&y.intent))
    });

    let mut edges = Vec::new();
    for i in 0..concepts.len() {
        'candidates: for j in 0..concepts.len() {
            if i == j || !is_strict_subset(&concepts[i].extent, &concepts[j].extent) {
                continue;
            }
            for k in 0..concepts.len() {
                if k != i
                    && k != j
                    && is_strict_subset(&concepts[i].extent, &concepts[k].extent)
                    && is_strict_subset(&concepts[k].extent, &concepts[j].extent)
                {
                    continue 'candidates;
                }
            }
            edges.push((i, j));
        }
    }
    edges.sort();
    Ok(AocPoset { concepts, edges })
}

fn is_strict_subset(a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> bool {
    a.len() < b.len() && a.is_subset(b)
}

/// One node of a constraint set: a maximal group of attributes sharing an
/// extent. The node whose extent is every object is the common node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeGroup {
    /// Stable name, `grp-<concept index>`.
    pub name: String,
    pub attributes: BTreeSet<String>,
    /// Names of the objects whose products carry this group.
    pub extent: BTreeSet<String>,
    pub is_common: bool,
}

/// The variability constraints read off an AOC-poset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSet {
    /// Attribute-introducing concepts, in concept order.
    pub nodes: Vec<NodeGroup>,
    /// `(a, b)`: selecting anything from node `a` implies node `b`.
    /// Transitively reduced, sorted.
    pub implications: Vec<(String, String)>,
    /// Unordered disjoint-extent pairs, stored sorted.
    pub mutual_exclusions: Vec<(String, String)>,
}

/// Extract the constraint set of a poset built from `context`.
pub fn extract_constraints(poset: &AocPoset, context: &FormalContext) -> ConstraintSet {
    let mut nodes = Vec::new();
    let mut node_extents: Vec<(String, &BTreeSet<usize>)> = Vec::new();
    let all_objects: BTreeSet<usize> = (0..context.objects.len()).collect();
    for (index, concept) in poset.concepts.iter().enumerate() {
        if concept.introduced_attributes.is_empty() {
            continue;
        }
        let name = format!("grp-{index}");
        nodes.push(NodeGroup {
            name: name.clone(),
            attributes: concept
                .introduced_attributes
                .iter()
                .map(|&a| context.attributes[a].clone())
                .collect(),
            extent: concept
                .extent
                .iter()
                .map(|&o| context.objects[o].clone())
                .collect(),
            is_common: concept.extent == all_objects,
        });
        node_extents.push((name, &concept.extent));
    }

    let mut implications = Vec::new();
    for (i, (from, from_ext)) in node_extents.iter().enumerate() {
        'target: for (j, (to, to_ext)) in node_extents.iter().enumerate() {
            if i == j || !is_strict_subset(from_ext, to_ext) {
                continue;
            }
            for (k, (_, mid_ext)) in node_extents.iter().enumerate() {
                if k != i
                    && k != j
                    && is_strict_subset(from_ext, mid_ext)
                    && is_strict_subset(mid_ext, to_ext)
                {
                    continue 'target;
                }
            }
            implications.push((from.clone(), to.clone()));
        }
    }
    implications.sort();

    let mut mutual_exclusions = Vec::new();
    for (i, (a, a_ext)) in node_extents.iter().enumerate() {
        for (b, b_ext) in node_extents.iter().skip(i + 1) {
            if a_ext.is_disjoint(b_ext) {
                mutual_exclusions.push((a.clone(), b.clone()));
            }
        }
    }
    mutual_exclusions.sort();

    ConstraintSet {
        nodes,
        implications,
        mutual_exclusions,
    }
}

impl ConstraintSet {
    /// Attributes present in every object, empty when no common node exists.
    pub fn common_attributes(&self) -> BTreeSet<String> {
        self.nodes
            .iter()
            .filter(|n| n.is_common)
            .flat_map(|n| n.attributes.iter().cloned())
            .collect()
    }

    /// The co-occurrence groups: variable (non-common) nodes.
    pub fn variable_groups(&self) -> impl Iterator<Item = &NodeGroup> {
        self.nodes.iter().filter(|n| !n.is_common)
    }

    pub fn node(&self, name: &str) -> Option<&NodeGroup> {
        self.nodes.iter().find(|n| n.name == name)
    }

    /// Node of a given attribute, if any.
    pub fn node_of(&self, attribute: &str) -> Option<&NodeGroup> {
        self.nodes.iter().find(|n| n.attributes.contains(attribute))
    }

    /// Transitive closure of the implications at the attribute level:
    /// all ordered pairs `(a, b)`, `a != b`, such that every object with
    /// `a` also has `b`. Includes same-node pairs.
    pub fn attribute_implication_closure(&self) -> BTreeSet<(String, String)> {
        let index: BTreeMap<&str, usize> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.name.as_str(), i))
            .collect();
        // Node-level reachability over the reduced implication edges.
        let mut reach: Vec<BTreeSet<usize>> = (0..self.nodes.len())
            .map(|i| std::iter::once(i).collect())
            .collect();
        let mut changed = true;
        while changed {
            changed = false;
            for (from, to) in &self.implications {
                let (fi, ti) = (index[from.as_str()], index[to.as_str()]);
                let additions: Vec<usize> = reach[ti].difference(&reach[fi]).copied().collect();
                if !additions.is_empty() {
                    reach[fi].extend(additions);
                    changed = true;
                }
            }
        }
        let mut pairs = BTreeSet::new();
        for (fi, node) in self.nodes.iter().enumerate() {
            for target in reach[fi].iter().map(|&ti| &self.nodes[ti]) {
                for a in &node.attributes {
                    for b in &target.attributes {
                        if a != b {
                            pairs.insert((a.clone(), b.clone()));
                        }
                    }
                }
            }
        }
        pairs
    }

    /// All unordered attribute pairs with disjoint extents, as sorted pairs.
    pub fn attribute_mutex_pairs(&self) -> BTreeSet<(String, String)> {
        let mut pairs = BTreeSet::new();
        for (a_name, b_name) in &self.mutual_exclusions {
            let a = self.node(a_name).expect("mutex references known node");
            let b = self.node(b_name).expect("mutex references known node");
            for x in &a.attributes {
                for y in &b.attributes {
                    let pair = if x < y {
                        (x.clone(), y.clone())
                    } else {
                        (y.clone(), x.clone())
                    };
                    pairs.insert(pair);
                }
            }
        }
        pairs
    }

    /// Order-free structural summary used to compare models: the common
    /// attribute set, the variable-group partition, and the attribute-level
    /// closures. Names play no part.
    pub fn canonical_form(&self) -> CanonicalForm {
        (
            self.common_attributes(),
            self.variable_groups().map(|g| g.attributes.clone()).collect(),
            self.attribute_implication_closure(),
            self.attribute_mutex_pairs(),
        )
    }
}

/// What [`ConstraintSet::canonical_form`] returns: common attributes,
/// variable-group partition, implication closure, mutual exclusions.
pub type CanonicalForm = (
    BTreeSet<String>,
    BTreeSet<BTreeSet<String>>,
    BTreeSet<(String, String)>,
    BTreeSet<(String, String)>,
);

//! The product-line repository and the incremental integration step.
//!
//! A repository holds one super-tree per source path — the union of every
//! integrated product's artefacts for that path — plus a record per
//! product of its name, its feature set, and its artefact configuration
//! (the exact set of rendered ids the product selects from the
//! super-trees). Integration parses, identifies, and merges one product,
//! then bumps the iteration counter; it never removes or rewrites
//! existing artefacts, so configurations recorded earlier stay valid
//! forever.

mod merge;
mod sequence;
pub mod store;

pub use sequence::{longest_common_subsequence, mint_duplicates, super_sequence};
pub(crate) use sequence::lcs_pairs;

use std::collections::{BTreeMap, BTreeSet};

use crate::artefact::{identify, ArtefactTree};
use crate::minilang::{parse, SourceFile};
use crate::{Result, SplError};

/// A concrete product variant handed to integration: a name, the features
/// it realizes, and its source files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Product {
    pub name: String,
    pub features: Vec<String>,
    pub files: Vec<SourceFile>,
}

impl Product {
    pub fn new(
        name: impl Into<String>,
        features: impl IntoIterator<Item = impl Into<String>>,
        files: Vec<SourceFile>,
    ) -> Self {
        Product {
            name: name.into(),
            features: features.into_iter().map(Into::into).collect(),
            files,
        }
    }
}

/// What the repository remembers about an integrated product.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductRecord {
    pub name: String,
    /// Declared features, first-seen order, duplicates removed.
    pub features: Vec<String>,
    /// Rendered ids of every artefact the product contains.
    pub configuration: BTreeSet<String>,
}

/// An incrementally grown software product line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplRepository {
    pub name: String,
    /// Number of completed integration steps.
    pub iteration: u32,
    super_trees: BTreeMap<String, ArtefactTree>,
    /// Records in integration order.
    pub products: Vec<ProductRecord>,
    /// Feature traces: artefact group name to feature conjunction.
    pub traces: BTreeMap<String, Vec<String>>,
}

impl SplRepository {
    pub fn new(name: impl Into<String>) -> Self {
        SplRepository {
            name: name.into(),
            iteration: 0,
            super_trees: BTreeMap::new(),
            products: Vec::new(),
            traces: BTreeMap::new(),
        }
    }

    /// Integrate one product: parse and identify every file, then merge
    /// each artefact tree into the super-tree for its path (adopting the
    /// tree wholesale when the path is new). Parsing happens up front so a
    /// syntax error cannot leave a half-merged repository behind.
    pub fn integrate(&mut self, product: &Product) -> Result<()> {
        if product.name.is_empty() || self.products.iter().any(|p| p.name == product.name) {
            return Err(SplError::DuplicateProductName(product.name.clone()));
        }
        let mut features: Vec<String> = Vec::new();
        for f in &product.features {
            if f.is_empty() {
                return Err(SplError::UnknownFeature(String::new()));
            }
            if !features.contains(f) {
                features.push(f.clone());
            }
        }
        if features.is_empty() {
            return Err(SplError::EmptyFeatureList(product.name.clone()));
        }

        let mut identified = Vec::with_capacity(product.files.len());
        let mut seen_paths = BTreeSet::new();
        for file in &product.files {
            if !seen_paths.insert(file.path.clone()) {
                return Err(SplError::DuplicateFile(file.path.clone()));
            }
            identified.push(identify(&parse(file)?, &file.path));
        }

        let mut configuration = BTreeSet::new();
        for tree in identified {
            match self.super_trees.get_mut(&tree.path) {
                Some(existing) => {
                    merge::merge_tree(&mut existing.root, &tree.root, &product.name, &mut configuration)?
                }
                None => {
                    let mut tree = tree;
                    merge::adopt_tree(&mut tree.root, &product.name, &mut configuration);
                    self.super_trees.insert(tree.path.clone(), tree);
                }
            }
        }
        self.products.push(ProductRecord {
            name: product.name.clone(),
            features,
            configuration,
        });
        self.iteration += 1;
        Ok(())
    }

    /// Super-trees in path order.
    pub fn super_trees(&self) -> impl Iterator<Item = &ArtefactTree> {
        self.super_trees.values()
    }

    pub fn super_tree(&self, path: &str) -> Option<&ArtefactTree> {
        self.super_trees.get(path)
    }

    /// All paths known to the repository, sorted.
    pub fn paths(&self) -> Vec<&str> {
        self.super_trees.keys().map(String::as_str).collect()
    }

    /// Rendered ids of every artefact in every super-tree, sorted.
    pub fn artefact_ids(&self) -> BTreeSet<String> {
        let mut ids = BTreeSet::new();
        for tree in self.super_trees.values() {
            ids.append(&mut tree.root.subtree_ids());
        }
        ids
    }

    pub fn artefact_count(&self) -> usize {
        self.super_trees.values().map(|t| t.root.node_count()).sum()
    }

    pub fn product(&self, name: &str) -> Option<&ProductRecord> {
        self.products.iter().find(|p| p.name == name)
    }

    /// Every feature declared by any integrated product, sorted.
    pub fn feature_names(&self) -> BTreeSet<String> {
        self.products
            .iter()
            .flat_map(|p| p.features.iter().cloned())
            .collect()
    }

    /// Used by persistence to rebuild a repository verbatim.
    pub(crate) fn from_parts(
        name: String,
        iteration: u32,
        super_trees: BTreeMap<String, ArtefactTree>,
        products: Vec<ProductRecord>,
        traces: BTreeMap<String, Vec<String>>,
    ) -> Self {
        SplRepository {
            name,
            iteration,
            super_trees,
            products,
            traces,
        }
    }
}

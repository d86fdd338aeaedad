//! Variability models derived from the repository by concept analysis.
//!
//! Two models share one machinery, differing only in the attribute set of
//! the underlying formal context:
//!
//! * the **artefact-level model** (AVM) relates products to the artefact
//!   ids in their configurations,
//! * the **feature-level model** (FVM) relates products to the features
//!   they were integrated with.
//!
//! On top of the AVM sits the [`FeatureTraceTable`]: for every artefact
//! group, the conjunction of features shared by all products containing
//! that group. The common group is traced like any other — its conjunction
//! is the feature set common to the whole family.

use std::collections::{BTreeMap, BTreeSet};

use crate::fca::{build_aoc_poset, extract_constraints, AocPoset, ConstraintSet, FormalContext};
use crate::integration::SplRepository;
use crate::{Result, SplError};

/// Which attribute set a model was built over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelLevel {
    Artefact,
    Feature,
}

/// A variability model: the context it was built from, its AOC-poset and
/// the extracted constraints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariabilityModel {
    pub level: ModelLevel,
    pub context: FormalContext,
    pub poset: AocPoset,
    pub constraints: ConstraintSet,
}

/// Context with one object per integrated product and one attribute per
/// artefact id in the repository.
pub fn artefact_context(repo: &SplRepository) -> Result<FormalContext> {
    if repo.products.is_empty() {
        return Err(SplError::EmptyRepository);
    }
    let objects: Vec<String> = repo.products.iter().map(|p| p.name.clone()).collect();
    let attributes: Vec<String> = repo.artefact_ids().into_iter().collect();
    let memberships: Vec<&BTreeSet<String>> =
        repo.products.iter().map(|p| &p.configuration).collect();
    Ok(FormalContext::from_fn(objects, attributes.clone(), |o, a| {
        memberships[o].contains(&attributes[a])
    }))
}

/// Context with one object per integrated product and one attribute per
/// feature name seen anywhere in the repository.
pub fn feature_context(repo: &SplRepository) -> Result<FormalContext> {
    if repo.products.is_empty() {
        return Err(SplError::EmptyRepository);
    }
    let objects: Vec<String> = repo.products.iter().map(|p| p.name.clone()).collect();
    let attributes: Vec<String> = repo.feature_names().into_iter().collect();
    let features: Vec<BTreeSet<&str>> = repo
        .products
        .iter()
        .map(|p| p.features.iter().map(String::as_str).collect())
        .collect();
    Ok(FormalContext::from_fn(objects, attributes.clone(), |o, a| {
        features[o].contains(attributes[a].as_str())
    }))
}

fn build_model(level: ModelLevel, context: FormalContext) -> Result<VariabilityModel> {
    let poset = build_aoc_poset(&context)?;
    let constraints = extract_constraints(&poset, &context);
    Ok(VariabilityModel {
        level,
        context,
        poset,
        constraints,
    })
}

/// Build the artefact-level variability model of `repo`.
pub fn build_avm(repo: &SplRepository) -> Result<VariabilityModel> {
    build_model(ModelLevel::Artefact, artefact_context(repo)?)
}

/// Build the feature-level variability model of `repo`.
pub fn build_fvm(repo: &SplRepository) -> Result<VariabilityModel> {
    build_model(ModelLevel::Feature, feature_context(repo)?)
}

/// Map from artefact group name to the feature conjunction that traces it.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FeatureTraceTable {
    pub entries: BTreeMap<String, BTreeSet<String>>,
}

/// Compute the trace table of an artefact-level model: each group maps to
/// the intersection of the feature sets of the products in its extent.
/// Groups whose extent shares no feature map to the empty conjunction.
pub fn trace_features(avm: &VariabilityModel, repo: &SplRepository) -> FeatureTraceTable {
    let features_of: BTreeMap<&str, BTreeSet<&str>> = repo
        .products
        .iter()
        .map(|p| {
            (
                p.name.as_str(),
                p.features.iter().map(String::as_str).collect(),
            )
        })
        .collect();
    let mut entries = BTreeMap::new();
    for node in &avm.constraints.nodes {
        let mut shared: Option<BTreeSet<&str>> = None;
        for product in &node.extent {
            let features = features_of
                .get(product.as_str())
                .expect("extent references integrated product");
            shared = Some(match shared {
                None => features.clone(),
                Some(acc) => acc.intersection(features).copied().collect(),
            });
        }
        let conjunction = shared
            .unwrap_or_default()
            .into_iter()
            .map(str::to_string)
            .collect();
        entries.insert(node.name.clone(), conjunction);
    }
    FeatureTraceTable { entries }
}

impl SplRepository {
    /// Record manual trace overrides: `group` must be a node of the current
    /// artefact-level model and every feature must already be known.
    pub fn apply_traces(&mut self, overrides: &BTreeMap<String, Vec<String>>) -> Result<()> {
        let avm = build_avm(self)?;
        let known_features = self.feature_names();
        for (group, features) in overrides {
            if avm.constraints.node(group).is_none() {
                return Err(SplError::UnknownGroup(group.clone()));
            }
            for feature in features {
                if !known_features.contains(feature) {
                    return Err(SplError::UnknownFeature(feature.clone()));
                }
            }
        }
        for (group, features) in overrides {
            let mut deduped = Vec::new();
            for feature in features {
                if !deduped.contains(feature) {
                    deduped.push(feature.clone());
                }
            }
            self.traces.insert(group.clone(), deduped);
        }
        Ok(())
    }

    /// Effective trace table: the computed conjunctions overlaid with any
    /// recorded overrides that still name a current group.
    pub fn effective_traces(&self) -> Result<FeatureTraceTable> {
        let avm = build_avm(self)?;
        let mut table = trace_features(&avm, self);
        for (group, features) in &self.traces {
            if table.entries.contains_key(group) {
                table
                    .entries
                    .insert(group.clone(), features.iter().cloned().collect());
            }
        }
        Ok(table)
    }
}

/// Render a model as a GraphViz digraph: one box per group (common group
/// double-bordered), solid edges for implications pointing at the implied
/// group, dashed undirected edges for mutual exclusions.
pub fn export_dot(model: &VariabilityModel) -> String {
    let mut out = String::new();
    let title = match model.level {
        ModelLevel::Artefact => "artefact_variability",
        ModelLevel::Feature => "feature_variability",
    };
    out.push_str(&format!("digraph {title} {{\n"));
    out.push_str("    rankdir=BT;\n");
    out.push_str("    node [shape=box];\n");
    for node in &model.constraints.nodes {
        let attrs: Vec<&str> = node.attributes.iter().map(String::as_str).collect();
        let label = format!(
            "{}\\n{{{}}}\\n{} of {} products",
            node.name,
            attrs.join(", "),
            node.extent.len(),
            model.context.objects.len()
        );
        let peripheries = if node.is_common { 2 } else { 1 };
        out.push_str(&format!(
            "    \"{}\" [label=\"{}\", peripheries={}];\n",
            node.name, label, peripheries
        ));
    }
    for (from, to) in &model.constraints.implications {
        out.push_str(&format!("    \"{from}\" -> \"{to}\";\n"));
    }
    for (a, b) in &model.constraints.mutual_exclusions {
        out.push_str(&format!(
            "    \"{a}\" -> \"{b}\" [dir=none, style=dashed, constraint=false];\n"
        ));
    }
    out.push_str("}\n");
    out
}

//! Product-family fixtures and synthetic family generation.
//!
//! A [`FamilySpec`] describes a whole family compactly: a shared skeleton
//! of MiniJ files containing named anchor lines, per-feature code
//! fragments that attach at those anchors, and the list of products as
//! feature subsets. [`synthesize`] weaves each product's sources; because
//! the feature subsets are declared, [`ground_truth_constraints`] knows
//! the family's true variability independently of any repository, which
//! makes synthesized families self-checking test corpora.
//!
//! Anchors make the hard merge cases constructible on purpose: fragments
//! from different features interleave at one anchor by their `order`
//! field, producing the statement-sequence overlaps, twins, and forced
//! duplicates that exercise the integrator.
//!
//! Skeleton syntax, one directive per line:
//!
//! * `@name@` — insertion anchor; replaced by the selected fragments'
//!   lines (sorted by `order`), indented like the anchor line itself.
//! * `@pad:N@` — `N` deterministic filler statements, identical across
//!   the family's products (they depend only on the seed and position).

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::artefact::content_hash;
use crate::fca::{build_aoc_poset, extract_constraints, ConstraintSet, FormalContext};
use crate::integration::Product;
use crate::minilang::SourceFile;
use crate::{Result, SplError};

/// A compact description of a product family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct FamilySpec {
    pub name: String,
    pub feature_pool: Vec<String>,
    /// Path → skeleton lines shared by every product.
    #[serde(default)]
    pub skeleton: BTreeMap<String, Vec<String>>,
    /// Feature → the fragments its selection contributes.
    #[serde(default)]
    pub fragments: BTreeMap<String, Vec<Fragment>>,
    pub products: Vec<ProductSpec>,
}

/// One piece of feature code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
pub enum Fragment {
    /// Lines inserted at a skeleton anchor, ordered among all fragments
    /// attaching there.
    #[serde(rename_all = "camelCase")]
    Splice {
        file: String,
        anchor: String,
        order: u32,
        lines: Vec<String>,
    },
    /// A whole file present only when the feature is selected.
    #[serde(rename_all = "camelCase")]
    NewFile { path: String, lines: Vec<String> },
}

/// A product as a named feature subset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ProductSpec {
    pub name: String,
    pub features: Vec<String>,
}

impl FamilySpec {
    pub fn from_json(json: &str) -> Result<FamilySpec> {
        let spec: FamilySpec = serde_json::from_str(json)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Structural checks; composition problems (anchor collisions) only
    /// surface per product during synthesis.
    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(SplError::InvalidFamily(msg));
        if self.name.is_empty() {
            return invalid("family name is empty".into());
        }
        let pool: BTreeSet<&str> = self.feature_pool.iter().map(String::as_str).collect();
        if pool.len() != self.feature_pool.len() || pool.contains("") {
            return invalid(format!("feature pool of {} is not a set of names", self.name));
        }
        for feature in self.fragments.keys() {
            if !pool.contains(feature.as_str()) {
                return Err(SplError::UnknownFeature(feature.clone()));
            }
        }
        let anchors: BTreeSet<(&str, String)> = self
            .skeleton
            .iter()
            .flat_map(|(path, lines)| {
                lines
                    .iter()
                    .filter_map(|l| parse_anchor(l))
                    .map(move |a| (path.as_str(), a))
            })
            .collect();
        for (feature, fragments) in &self.fragments {
            for fragment in fragments {
                match fragment {
                    Fragment::Splice { file, anchor, .. } => {
                        if !anchors.contains(&(file.as_str(), anchor.clone())) {
                            return invalid(format!(
                                "fragment of {feature} targets unknown anchor @{anchor}@ in {file}"
                            ));
                        }
                    }
                    Fragment::NewFile { path, .. } => {
                        if self.skeleton.contains_key(path) {
                            return invalid(format!(
                                "fragment of {feature} shadows skeleton file {path}"
                            ));
                        }
                    }
                }
            }
        }
        if self.products.is_empty() {
            return invalid(format!("family {} declares no products", self.name));
        }
        let mut names = BTreeSet::new();
        for product in &self.products {
            if product.name.is_empty() || !names.insert(&product.name) {
                return Err(SplError::DuplicateProductName(product.name.clone()));
            }
            if product.features.is_empty() {
                return Err(SplError::EmptyFeatureList(product.name.clone()));
            }
            for feature in &product.features {
                if !pool.contains(feature.as_str()) {
                    return Err(SplError::UnknownFeature(feature.clone()));
                }
            }
        }
        Ok(())
    }
}

/// The anchor name of a skeleton line, if it is an anchor line.
fn parse_anchor(line: &str) -> Option<String> {
    let t = line.trim();
    if t.len() > 2 && t.starts_with('@') && t.ends_with('@') && !t.starts_with("@pad:") {
        Some(t[1..t.len() - 1].to_string())
    } else {
        None
    }
}

fn parse_pad(line: &str) -> Option<usize> {
    let t = line.trim();
    t.strip_prefix("@pad:")?.strip_suffix('@')?.parse().ok()
}

/// Weave every product of `spec`. Deterministic for a given `(spec, seed)`
/// pair; the seed only drives `@pad:N@` filler, which is identical across
/// products.
pub fn synthesize(spec: &FamilySpec, seed: u64) -> Result<Vec<Product>> {
    spec.validate()?;
    spec.products
        .iter()
        .map(|product| {
            let selected: BTreeSet<&str> =
                product.features.iter().map(String::as_str).collect();
            let mut files = Vec::new();
            for (path, lines) in &spec.skeleton {
                files.push(SourceFile::new(
                    path.clone(),
                    compose_file(spec, path, lines, &selected, seed)?,
                )?);
            }
            for feature in &spec.feature_pool {
                if !selected.contains(feature.as_str()) {
                    continue;
                }
                for fragment in spec.fragments.get(feature).into_iter().flatten() {
                    if let Fragment::NewFile { path, lines } = fragment {
                        if files.iter().any(|f| f.path == *path) {
                            return Err(SplError::DuplicateFile(path.clone()));
                        }
                        files.push(SourceFile::new(path.clone(), lines.join("\n") + "\n")?);
                    }
                }
            }
            Ok(Product::new(
                product.name.clone(),
                product.features.clone(),
                files,
            ))
        })
        .collect()
}

fn compose_file(
    spec: &FamilySpec,
    path: &str,
    skeleton: &[String],
    selected: &BTreeSet<&str>,
    seed: u64,
) -> Result<String> {
    let mut out = Vec::new();
    for (index, line) in skeleton.iter().enumerate() {
        if let Some(anchor) = parse_anchor(line) {
            splice_at(spec, path, &anchor, indentation(line), selected, &mut out)?;
        } else if let Some(count) = parse_pad(line) {
            pad_lines(seed, path, index, count, indentation(line), &mut out);
        } else {
            out.push(line.clone());
        }
    }
    Ok(out.join("\n") + "\n")
}

fn indentation(line: &str) -> &str {
    &line[..line.len() - line.trim_start().len()]
}

fn splice_at(
    spec: &FamilySpec,
    path: &str,
    anchor: &str,
    indent: &str,
    selected: &BTreeSet<&str>,
    out: &mut Vec<String>,
) -> Result<()> {
    let mut attached: Vec<(u32, &Vec<String>)> = Vec::new();
    for feature in &spec.feature_pool {
        if !selected.contains(feature.as_str()) {
            continue;
        }
        for fragment in spec.fragments.get(feature).into_iter().flatten() {
            if let Fragment::Splice {
                file,
                anchor: at,
                order,
                lines,
            } = fragment
            {
                if file == path && at == anchor {
                    if attached.iter().any(|(o, _)| o == order) {
                        return Err(SplError::FragmentCollision {
                            file: path.to_string(),
                            anchor: anchor.to_string(),
                            order: i64::from(*order),
                        });
                    }
                    attached.push((*order, lines));
                }
            }
        }
    }
    attached.sort_by_key(|(order, _)| *order);
    for (_, lines) in attached {
        for line in lines {
            out.push(format!("{indent}{line}"));
        }
    }
    Ok(())
}

/// Filler statements for one `@pad:N@` line, keyed by seed and position
/// only, so every product sees the same padding.
fn pad_lines(seed: u64, path: &str, index: usize, count: usize, indent: &str, out: &mut Vec<String>) {
    let key = content_hash(format!("{seed}:{path}:{index}").as_bytes());
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    for k in 0..count {
        out.push(format!(
            "{indent}int pad{index}_{k} = {};",
            rng.random_range(0..1_000_000)
        ));
    }
}

/// The family's true variability, computed from the declared feature
/// subsets alone (no synthesis, no repository).
pub fn ground_truth_constraints(spec: &FamilySpec) -> Result<ConstraintSet> {
    spec.validate()?;
    let objects: Vec<String> = spec.products.iter().map(|p| p.name.clone()).collect();
    let mut attributes: Vec<String> = spec.feature_pool.clone();
    attributes.sort();
    let rows: Vec<BTreeSet<&str>> = spec
        .products
        .iter()
        .map(|p| p.features.iter().map(String::as_str).collect())
        .collect();
    let context = FormalContext::from_fn(objects, attributes.clone(), |o, a| {
        rows[o].contains(attributes[a].as_str())
    });
    let poset = build_aoc_poset(&context)?;
    Ok(extract_constraints(&poset, &context))
}

/// Knobs for [`random_family`]. `statements` is the approximate total
/// statement count across one product's skeleton.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FamilyParams {
    pub products: usize,
    pub files: usize,
    pub features: usize,
    pub statements: usize,
}

/// Generate a random but well-formed family: a skeleton of `files`
/// classes padded to roughly `statements` statements, `features` features
/// contributing interleaved statement and member fragments (with
/// occasional repeated lines and cross-feature shared statements, to
/// exercise twin and duplicate handling), and `products` random feature
/// subsets. Deterministic per seed.
pub fn random_family(params: &FamilyParams, seed: u64) -> FamilySpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let features: Vec<String> = (0..params.features.max(1))
        .map(|i| format!("F{i}"))
        .collect();
    let pad = (params.statements / params.files.max(1)).max(1);

    let mut skeleton = BTreeMap::new();
    for f in 0..params.files.max(1) {
        skeleton.insert(
            format!("C{f}.java"),
            vec![
                format!("class C{f} {{"),
                "    @fields@".to_string(),
                "    void run() {".to_string(),
                format!("        @pad:{pad}@"),
                "        @main@".to_string(),
                "    }".to_string(),
                "    void aux() {".to_string(),
                "        @aux@".to_string(),
                "    }".to_string(),
                "}".to_string(),
            ],
        );
    }

    let mut used_orders: BTreeMap<(String, &str), BTreeSet<u32>> = BTreeMap::new();
    let mut counter = 0usize;
    let mut fragments: BTreeMap<String, Vec<Fragment>> = BTreeMap::new();
    for (i, feature) in features.iter().enumerate() {
        let mut list = Vec::new();
        for _ in 0..rng.random_range(1..=3) {
            let file = format!("C{}.java", rng.random_range(0..params.files.max(1)));
            let anchor = ["fields", "main", "aux"][rng.random_range(0..3)];
            let order = loop {
                let candidate = rng.random_range(0..10_000);
                let taken = used_orders.entry((file.clone(), anchor)).or_default();
                if taken.insert(candidate) {
                    break candidate;
                }
            };
            let lines = if anchor == "fields" {
                counter += 1;
                vec![format!("int f{i}_v{counter} = {};", rng.random_range(0..100))]
            } else {
                let mut lines = Vec::new();
                for _ in 0..rng.random_range(1..=4) {
                    counter += 1;
                    let line = if rng.random_bool(0.1) {
                        format!("shared_{anchor}();")
                    } else {
                        format!("f{i}_s{counter}();")
                    };
                    if rng.random_bool(0.15) {
                        lines.push(line.clone()); // deliberate twin
                    }
                    lines.push(line);
                }
                lines
            };
            list.push(Fragment::Splice {
                file,
                anchor: anchor.to_string(),
                order,
                lines,
            });
        }
        fragments.insert(feature.clone(), list);
    }

    let products = (0..params.products.max(1))
        .map(|p| {
            let count = rng.random_range(1..=features.len());
            let mut picked = Vec::new();
            while picked.len() < count {
                let f = features[rng.random_range(0..features.len())].clone();
                if !picked.contains(&f) {
                    picked.push(f);
                }
            }
            ProductSpec {
                name: format!("p{p}"),
                features: picked,
            }
        })
        .collect();

    FamilySpec {
        name: format!("random-{seed}"),
        feature_pool: features,
        skeleton,
        fragments,
        products,
    }
}

/// The families bundled with the crate.
pub fn builtin_families() -> Vec<FamilySpec> {
    [
        include_str!("../fixtures/greeter_overlap.json"),
        include_str!("../fixtures/greeter_trio.json"),
    ]
    .iter()
    .map(|json| FamilySpec::from_json(json).expect("bundled family specs are valid"))
    .collect()
}

pub fn builtin_family(name: &str) -> Option<FamilySpec> {
    builtin_families().into_iter().find(|f| f.name == name)
}

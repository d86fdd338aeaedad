//! Cross-module pipeline checks: synthesize → integrate → persist →
//! reload → generate → validate, plus parity between the annotated
//! renderer and the plain printer.

use std::collections::BTreeMap;

use splforge_core::codegen::{generate_spl, Condition, SplMode};
use splforge_core::corpus::{builtin_family, random_family, synthesize, FamilyParams};
use splforge_core::integration::{store, SplRepository};
use splforge_core::minilang;
use splforge_core::validation::round_trip;

fn greeter_repo() -> SplRepository {
    let spec = builtin_family("greeter-overlap").unwrap();
    let mut repo = SplRepository::new(&spec.name);
    for product in synthesize(&spec, 0).unwrap() {
        repo.integrate(&product).unwrap();
    }
    repo
}

#[test]
fn store_round_trip_preserves_generation_behavior() {
    let repo = greeter_repo();
    let dir = tempfile::tempdir().unwrap();
    store::save(&repo, dir.path()).unwrap();
    let loaded = store::load(dir.path()).unwrap();
    assert_eq!(loaded, repo);

    let before = generate_spl(&repo, SplMode::Features);
    let after = generate_spl(&loaded, SplMode::Features);
    assert_eq!(before, after);
}

#[test]
fn identical_runs_write_identical_stores() {
    let spec = random_family(
        &FamilyParams {
            products: 5,
            files: 4,
            features: 6,
            statements: 60,
        },
        77,
    );
    let mut bytes: Vec<BTreeMap<String, Vec<u8>>> = Vec::new();
    for _ in 0..2 {
        let mut repo = SplRepository::new(&spec.name);
        for product in synthesize(&spec, 2).unwrap() {
            repo.integrate(&product).unwrap();
        }
        let dir = tempfile::tempdir().unwrap();
        store::save(&repo, dir.path()).unwrap();
        let mut files = BTreeMap::new();
        for entry in walk(dir.path()) {
            let rel = entry
                .strip_prefix(dir.path())
                .unwrap()
                .to_string_lossy()
                .into_owned();
            files.insert(rel, std::fs::read(&entry).unwrap());
        }
        bytes.push(files);
    }
    assert_eq!(bytes[0], bytes[1]);
    assert!(bytes[0].keys().any(|k| k == "meta.json"));
    assert!(bytes[0].keys().any(|k| k == "pcm.csv"));
}

fn walk(dir: &std::path::Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(next) = stack.pop() {
        for entry in std::fs::read_dir(&next).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path);
            }
        }
    }
    out.sort();
    out
}

#[test]
fn id_annotations_evaluate_back_to_the_plain_print() {
    let repo = greeter_repo();
    let spl = generate_spl(&repo, SplMode::ArtefactIds);
    for file in &spl.files {
        let tree = repo.super_tree(&file.path).unwrap();
        let expected = minilang::print(&tree.root.to_ast());
        let all = file.evaluate(&|_: &Condition| true);
        assert_eq!(all.join("\n") + "\n", expected, "{}", file.path);
    }
}

#[test]
fn reloaded_repositories_keep_validating_clean() {
    let spec = random_family(
        &FamilyParams {
            products: 4,
            files: 3,
            features: 5,
            statements: 40,
        },
        13,
    );
    let products = synthesize(&spec, 3).unwrap();
    let mut repo = SplRepository::new(&spec.name);
    for product in &products {
        repo.integrate(product).unwrap();
    }
    let dir = tempfile::tempdir().unwrap();
    store::save(&repo, dir.path()).unwrap();
    let loaded = store::load(dir.path()).unwrap();

    // The loaded repository regenerates every product exactly, straight
    // from its persisted configurations.
    for product in &products {
        let config = loaded.product(&product.name).unwrap().configuration.clone();
        let files =
            splforge_core::codegen::generate_product_by_artefacts(&loaded, &config).unwrap();
        let report = splforge_core::validation::ast_diff(&product.files, &files).unwrap();
        assert!(report.is_clean(), "{}: {report:?}", product.name);
    }
    // And the plain in-memory protocol agrees.
    for entry in round_trip(&products).unwrap() {
        assert_eq!(entry.rep_err, 0.0, "{}", entry.name);
    }
}

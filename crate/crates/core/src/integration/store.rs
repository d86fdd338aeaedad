//! On-disk repository format.
//!
//! A repository directory contains:
//!
//! * `meta.json` — name, iteration counter, and the product records;
//! * `arts/<hash>.json` — one file per super-tree, named by the FNV-1a
//!   hash of the source path, nodes serialized in pre-order with explicit
//!   child counts;
//! * `pcm.csv` — the product-by-artefact matrix (products as rows in
//!   integration order, rendered ids as sorted columns);
//! * `traces.json` — the feature trace table.
//!
//! Serialization is fully deterministic: map keys are sorted, JSON is
//! pretty-printed with a trailing newline, and the matrix is derived from
//! the records. Saving the same repository state twice produces identical
//! bytes. A `.lock` file taken with [`lock`] serializes writers; the lock
//! is advisory and held for the lifetime of the returned guard.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ProductRecord, SplRepository};
use crate::artefact::{content_hash, Artefact, ArtefactId, ArtefactTree};
use crate::minilang::NodeKind;
use crate::{Result, SplError};

#[derive(Serialize, Deserialize)]
struct MetaFile {
    iteration: u32,
    name: String,
    products: Vec<MetaProduct>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct MetaProduct {
    artefact_configuration: Vec<String>,
    features: Vec<String>,
    name: String,
}

#[derive(Serialize, Deserialize)]
struct ArtFile {
    nodes: Vec<ArtNode>,
    path: String,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct ArtNode {
    child_count: usize,
    id: String,
    kind: NodeKind,
    origin: Vec<String>,
    value: String,
}

/// Create a fresh repository directory. The directory may already exist
/// but must be empty.
pub fn init(dir: &Path, name: &str) -> Result<()> {
    if dir.exists() {
        if !dir.is_dir() || fs::read_dir(dir)?.next().is_some() {
            return Err(SplError::Store(format!(
                "{} already exists and is not an empty directory",
                dir.display()
            )));
        }
    } else {
        fs::create_dir_all(dir)?;
    }
    save(&SplRepository::new(name), dir)
}

/// Write the repository under `dir`, creating the layout as needed.
pub fn save(repo: &SplRepository, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir.join("arts"))?;

    let meta = MetaFile {
        iteration: repo.iteration,
        name: repo.name.clone(),
        products: repo
            .products
            .iter()
            .map(|p| MetaProduct {
                artefact_configuration: p.configuration.iter().cloned().collect(),
                features: p.features.clone(),
                name: p.name.clone(),
            })
            .collect(),
    };
    write_json(&dir.join("meta.json"), &meta)?;
    write_json(&dir.join("traces.json"), &repo.traces)?;

    // One tree file per path; stale files from an older save of another
    // repository are not expected, but clearing keeps saves idempotent.
    for entry in fs::read_dir(dir.join("arts"))? {
        fs::remove_file(entry?.path())?;
    }
    for tree in repo.super_trees() {
        let mut nodes = Vec::with_capacity(tree.root.node_count());
        flatten(&tree.root, &mut nodes);
        let art = ArtFile {
            nodes,
            path: tree.path.clone(),
        };
        write_json(&dir.join("arts").join(art_file_name(&tree.path)), &art)?;
    }

    fs::write(dir.join("pcm.csv"), pcm_csv(repo))?;
    Ok(())
}

/// Read a repository back from `dir`.
pub fn load(dir: &Path) -> Result<SplRepository> {
    let meta: MetaFile = read_json(&dir.join("meta.json"))?;
    let traces: BTreeMap<String, Vec<String>> = read_json(&dir.join("traces.json"))?;

    let mut super_trees = BTreeMap::new();
    let arts_dir = dir.join("arts");
    let mut art_paths: Vec<PathBuf> = fs::read_dir(&arts_dir)
        .map_err(|e| SplError::Store(format!("missing arts directory: {e}")))?
        .map(|entry| entry.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    art_paths.sort();
    for file in art_paths {
        let art: ArtFile = read_json(&file)?;
        if art_file_name(&art.path) != file.file_name().unwrap().to_string_lossy() {
            return Err(SplError::Store(format!(
                "tree file {} does not match its recorded path {:?}",
                file.display(),
                art.path
            )));
        }
        let mut cursor = 0usize;
        let root = unflatten(&art.nodes, &mut cursor, &file)?;
        if cursor != art.nodes.len() {
            return Err(SplError::Store(format!(
                "trailing nodes in {}",
                file.display()
            )));
        }
        super_trees.insert(
            art.path.clone(),
            ArtefactTree {
                path: art.path,
                root,
            },
        );
    }

    let products = meta
        .products
        .into_iter()
        .map(|p| ProductRecord {
            name: p.name,
            features: p.features,
            configuration: p.artefact_configuration.into_iter().collect(),
        })
        .collect();
    Ok(SplRepository::from_parts(
        meta.name,
        meta.iteration,
        super_trees,
        products,
        traces,
    ))
}

/// Advisory writer lock. Dropping the guard releases the lock.
pub struct RepoLock {
    path: PathBuf,
}

impl Drop for RepoLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// Take the repository writer lock, failing if another holder exists.
pub fn lock(dir: &Path) -> Result<RepoLock> {
    let path = dir.join(".lock");
    match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
        Ok(_) => Ok(RepoLock { path }),
        Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
            Err(SplError::RepositoryLocked(dir.display().to_string()))
        }
        Err(e) => Err(e.into()),
    }
}

fn art_file_name(source_path: &str) -> String {
    format!("{:016x}.json", content_hash(source_path.as_bytes()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| SplError::Store(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

fn flatten(node: &Artefact, out: &mut Vec<ArtNode>) {
    out.push(ArtNode {
        child_count: node.children.len(),
        id: node.id.rendered(),
        kind: node.kind,
        origin: node.origin.iter().cloned().collect(),
        value: node.value.clone(),
    });
    for child in &node.children {
        flatten(child, out);
    }
}

fn unflatten(nodes: &[ArtNode], cursor: &mut usize, file: &Path) -> Result<Artefact> {
    let record = nodes.get(*cursor).ok_or_else(|| {
        SplError::Store(format!("truncated node list in {}", file.display()))
    })?;
    *cursor += 1;
    let id = ArtefactId::parse(&record.id).ok_or_else(|| {
        SplError::Store(format!("malformed id {:?} in {}", record.id, file.display()))
    })?;
    let mut children = Vec::with_capacity(record.child_count);
    for _ in 0..record.child_count {
        children.push(unflatten(nodes, cursor, file)?);
    }
    Ok(Artefact {
        id,
        kind: record.kind,
        value: record.value.clone(),
        children,
        origin: record.origin.iter().cloned().collect(),
    })
}

/// Product-by-artefact matrix as CSV: empty corner cell, sorted id columns,
/// one row per product in integration order. Fields are quoted only when
/// they contain commas, quotes, or newlines.
fn pcm_csv(repo: &SplRepository) -> String {
    let ids: Vec<String> = repo.artefact_ids().into_iter().collect();
    let mut out = String::new();
    out.push_str(&std::iter::once(String::new())
        .chain(ids.iter().map(|id| csv_field(id)))
        .collect::<Vec<_>>()
        .join(","));
    out.push('\n');
    for record in &repo.products {
        let mut row = vec![csv_field(&record.name)];
        for id in &ids {
            row.push(if record.configuration.contains(id) { "1" } else { "0" }.to_string());
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub(crate) fn csv_field(text: &str) -> String {
    if text.contains(',') || text.contains('"') || text.contains('\n') {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integration::Product;
    use crate::minilang::SourceFile;

    fn sample_repo() -> SplRepository {
        let mut repo = SplRepository::new("store-test");
        let products = [
            ("P1", vec!["Base"], "class M { void m ( ) { a ( ) ; a ( ) ; } }"),
            ("P2", vec!["Base", "X"], "class M { void m ( ) { a ( ) ; x ( ) ; a ( ) ; } }"),
        ];
        for (name, features, src) in products {
            repo.integrate(&Product::new(
                name,
                features,
                vec![SourceFile::new("M.java", src).unwrap()],
            ))
            .unwrap();
        }
        repo.traces.insert("grp-1".into(), vec!["X".into()]);
        repo
    }

    #[test]
    fn save_load_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let repo = sample_repo();
        save(&repo, dir.path()).unwrap();
        let loaded = load(dir.path()).unwrap();
        assert_eq!(repo, loaded);
    }

    #[test]
    fn saving_is_byte_deterministic() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        save(&sample_repo(), dir_a.path()).unwrap();
        save(&sample_repo(), dir_b.path()).unwrap();
        for name in ["meta.json", "pcm.csv", "traces.json"] {
            assert_eq!(
                fs::read(dir_a.path().join(name)).unwrap(),
                fs::read(dir_b.path().join(name)).unwrap(),
                "{name}"
            );
        }
        let list = |d: &Path| {
            let mut v: Vec<String> = fs::read_dir(d.join("arts"))
                .unwrap()
                .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
                .collect();
            v.sort();
            v
        };
        assert_eq!(list(dir_a.path()), list(dir_b.path()));
        for name in list(dir_a.path()) {
            assert_eq!(
                fs::read(dir_a.path().join("arts").join(&name)).unwrap(),
                fs::read(dir_b.path().join("arts").join(&name)).unwrap(),
                "{name}"
            );
        }
    }

    #[test]
    fn pcm_lists_every_id_and_membership() {
        let repo = sample_repo();
        let csv = pcm_csv(&repo);
        let mut lines = csv.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(header[0], "");
        assert_eq!(header.len() - 1, repo.artefact_ids().len());
        let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0][0], "P1");
        for (row, record) in rows.iter().zip(&repo.products) {
            for (cell, id) in row[1..].iter().zip(&header[1..]) {
                let expected = if record.configuration.contains(*id) { "1" } else { "0" };
                assert_eq!(cell, &expected, "{} / {id}", record.name);
            }
        }
    }

    #[test]
    fn init_requires_an_empty_directory() {
        let dir = tempfile::tempdir().unwrap();
        init(dir.path(), "fresh").unwrap();
        assert!(load(dir.path()).unwrap().products.is_empty());
        assert!(matches!(
            init(dir.path(), "again"),
            Err(SplError::Store(_))
        ));
    }

    #[test]
    fn lock_excludes_second_writer_and_releases_on_drop() {
        let dir = tempfile::tempdir().unwrap();
        let guard = lock(dir.path()).unwrap();
        assert!(matches!(
            lock(dir.path()),
            Err(SplError::RepositoryLocked(_))
        ));
        drop(guard);
        assert!(lock(dir.path()).is_ok());
    }

    #[test]
    fn corrupted_stores_are_reported_not_panicked() {
        let dir = tempfile::tempdir().unwrap();
        save(&sample_repo(), dir.path()).unwrap();
        let art = fs::read_dir(dir.path().join("arts"))
            .unwrap()
            .next()
            .unwrap()
            .unwrap()
            .path();
        fs::write(&art, "{\"nodes\": [], \"path\": \"M.java\"}").unwrap();
        assert!(load(dir.path()).is_err());
        fs::remove_file(dir.path().join("meta.json")).unwrap();
        assert!(load(dir.path()).is_err());
    }
}

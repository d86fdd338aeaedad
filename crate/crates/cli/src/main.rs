//! `splforge` — build an annotative software product line out of product
//! variants, one integration at a time, and generate back out of it.
//!
//! Exit codes: 0 success, 1 usage error, 2 domain error. Warnings go to
//! stderr with a `WARN: ` prefix and never change the exit code.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use splforge_core::codegen::{
    generate_product_by_artefacts, generate_product_by_features, generate_spl, simplify,
    AnnotatedFile, SplMode,
};
use splforge_core::corpus::{self, builtin_families, FamilyParams, FamilySpec};
use splforge_core::integration::{store, Product};
use splforge_core::minilang::SourceFile;
use splforge_core::validation::{report_csv, round_trip_with, RoundTripEntry};
use splforge_core::variability::{build_avm, build_fvm, export_dot};
use splforge_core::{Result, SplError};

#[derive(Parser)]
#[command(
    name = "splforge",
    version,
    about = "Incrementally integrate product variants into an annotative product line",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Create an empty repository directory.
    Init {
        /// Repository directory (created, or reused when empty).
        repo: PathBuf,
        /// Product-line name; defaults to the directory name.
        #[arg(long)]
        name: Option<String>,
    },
    /// Integrate one product's source tree into the repository.
    Integrate {
        /// Repository directory.
        repo: PathBuf,
        /// Directory holding the product's `.java` files.
        product_dir: PathBuf,
        /// Product name, unique within the repository.
        #[arg(long)]
        name: String,
        /// Comma-separated feature list describing the product.
        #[arg(long, value_delimiter = ',', required = true)]
        features: Vec<String>,
    },
    /// Write the annotated product-line code.
    GenSpl {
        /// Repository directory.
        repo: PathBuf,
        /// What the annotation conditions refer to.
        #[arg(long, value_enum, default_value_t = Mode::Features)]
        mode: Mode,
        /// Keep the fully annotated form instead of the simplified one.
        #[arg(long)]
        no_simplify: bool,
        /// Output directory; defaults to `<repo>/spl`.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Generate one product from the product line.
    GenProduct {
        /// Repository directory.
        repo: PathBuf,
        /// Comma-separated feature selection.
        #[arg(long, value_delimiter = ',', conflicts_with = "artefact_config")]
        features: Option<Vec<String>>,
        /// JSON file holding an array of artefact ids to select.
        #[arg(long)]
        artefact_config: Option<PathBuf>,
        /// Output directory for the generated sources.
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Show or override the feature traces of artefact groups.
    Trace {
        /// Repository directory.
        repo: PathBuf,
        /// JSON file mapping group names to feature conjunctions; applied
        /// and persisted. Without it the effective traces are printed.
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Export a variability model as DOT.
    ExportVm {
        /// Repository directory.
        repo: PathBuf,
        /// Model level: artefact groups or features.
        #[arg(long, value_enum, default_value_t = Level::Feature)]
        level: Level,
        /// Write the graph here instead of stdout.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Round-trip a product family through a fresh repository.
    Validate {
        /// Repository directory; must contain no products yet.
        repo: PathBuf,
        /// Family specification file (JSON).
        #[arg(long)]
        family: PathBuf,
        /// Seed for the family's deterministic filler code.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Synthesize a product family's source trees.
    Synth {
        /// Output directory; one subdirectory per product.
        #[arg(short, long)]
        out: PathBuf,
        /// Family specification file (JSON).
        #[arg(long, conflicts_with_all = ["builtin", "random"])]
        family: Option<PathBuf>,
        /// One of the bundled families.
        #[arg(long, conflicts_with = "random")]
        builtin: Option<String>,
        /// Generate a random family instead of reading one.
        #[arg(long)]
        random: bool,
        #[command(flatten)]
        shape: RandomShape,
        /// Seed for random-family structure and filler code.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the family specification itself (JSON).
        #[arg(long)]
        spec_out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RandomShape {
    /// Products in a `--random` family.
    #[arg(long, default_value_t = 4)]
    products: usize,
    /// Files per product in a `--random` family.
    #[arg(long, default_value_t = 3)]
    files: usize,
    /// Feature-pool size of a `--random` family.
    #[arg(long, default_value_t = 5)]
    features: usize,
    /// Approximate total statements in a `--random` family.
    #[arg(long, default_value_t = 120)]
    statements: usize,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Conditions name feature conjunctions.
    Features,
    /// Conditions name artefact co-occurrence groups.
    Groups,
    /// Conditions name single artefacts.
    Ids,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Level {
    Artefact,
    Feature,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version are successful output, not usage errors.
            let code = if err.exit_code() == 0 { 0 } else { 1 };
            let _ = err.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Init { repo, name } => {
            let name = name.unwrap_or_else(|| {
                repo.file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "spl".to_string())
            });
            store::init(&repo, &name)?;
            println!("initialized empty repository '{name}' at {}", repo.display());
            Ok(())
        }
        Command::Integrate {
            repo,
            product_dir,
            name,
            features,
        } => {
            let _lock = store::lock(&repo)?;
            let mut repository = store::load(&repo)?;
            let files = read_product_dir(&product_dir)?;
            let product = Product::new(name.clone(), features, files);
            repository.integrate(&product)?;
            store::save(&repository, &repo)?;
            let record = repository.product(&name).expect("just integrated");
            println!(
                "iteration {}: integrated {} ({} files, {} artefacts, {} total)",
                repository.iteration,
                name,
                product.files.len(),
                record.configuration.len(),
                repository.artefact_count()
            );
            Ok(())
        }
        Command::GenSpl {
            repo,
            mode,
            no_simplify,
            out,
        } => {
            let repository = store::load(&repo)?;
            let out = out.unwrap_or_else(|| repo.join("spl"));
            let spl = generate_spl(
                &repository,
                match mode {
                    Mode::Features => SplMode::Features,
                    Mode::Groups => SplMode::ArtefactGroups,
                    Mode::Ids => SplMode::ArtefactIds,
                },
            );
            warn_all(&spl.warnings);
            let files: Vec<AnnotatedFile> = if no_simplify {
                spl.files
            } else {
                spl.files.iter().map(simplify).collect()
            };
            for file in &files {
                write_source(&out, &file.path, &file.render())?;
            }
            println!("wrote {} annotated files to {}", files.len(), out.display());
            Ok(())
        }
        Command::GenProduct {
            repo,
            features,
            artefact_config,
            out,
        } => {
            let repository = store::load(&repo)?;
            let files: Vec<SourceFile> = match (features, artefact_config) {
                (Some(features), None) => {
                    let product = generate_product_by_features(&repository, &features)?;
                    warn_all(&product.warnings);
                    product.files
                }
                (None, Some(config_path)) => {
                    let ids: Vec<String> = serde_json::from_str(&read_text(&config_path)?)?;
                    let config: BTreeSet<String> = ids.into_iter().collect();
                    generate_product_by_artefacts(&repository, &config)?
                }
                _ => {
                    return Err(SplError::Store(
                        "gen-product needs exactly one of --features or --artefact-config"
                            .to_string(),
                    ))
                }
            };
            for file in &files {
                write_source(&out, &file.path, &file.text)?;
            }
            println!("wrote {} files to {}", files.len(), out.display());
            Ok(())
        }
        Command::Trace { repo, map } => match map {
            Some(map) => {
                let _lock = store::lock(&repo)?;
                let mut repository = store::load(&repo)?;
                let overrides: BTreeMap<String, Vec<String>> =
                    serde_json::from_str(&read_text(&map)?)?;
                let applied = overrides.len();
                repository.apply_traces(&overrides)?;
                store::save(&repository, &repo)?;
                println!("applied {applied} trace overrides");
                Ok(())
            }
            None => {
                let repository = store::load(&repo)?;
                let traces = repository.effective_traces()?;
                let text = serde_json::to_string_pretty(&traces.entries)?;
                println!("{text}");
                Ok(())
            }
        },
        Command::ExportVm { repo, level, dot } => {
            let repository = store::load(&repo)?;
            let model = match level {
                Level::Artefact => build_avm(&repository)?,
                Level::Feature => build_fvm(&repository)?,
            };
            let graph = export_dot(&model);
            match dot {
                Some(path) => {
                    std::fs::write(&path, &graph)?;
                    println!("wrote {}", path.display());
                }
                None => print!("{graph}"),
            }
            Ok(())
        }
        Command::Validate { repo, family, seed } => {
            let _lock = store::lock(&repo)?;
            let mut repository = store::load(&repo)?;
            if !repository.products.is_empty() {
                return Err(SplError::Store(format!(
                    "validate needs a repository without products; {} already has {}",
                    repo.display(),
                    repository.products.len()
                )));
            }
            let spec = read_family(&family)?;
            let products = corpus::synthesize(&spec, seed)?;
            let entries = round_trip_with(&mut repository, &products)?;
            store::save(&repository, &repo)?;
            print!("{}", report_csv(&entries));
            let dirty: Vec<&RoundTripEntry> =
                entries.iter().filter(|e| e.rep_err != 0.0).collect();
            if !dirty.is_empty() {
                return Err(SplError::Validation(format!(
                    "{} of {} products deviated from their originals",
                    dirty.len(),
                    entries.len()
                )));
            }
            Ok(())
        }
        Command::Synth {
            out,
            family,
            builtin,
            random,
            shape,
            seed,
            spec_out,
        } => {
            let spec = match (family, builtin, random) {
                (Some(path), None, false) => read_family(&path)?,
                (None, Some(name), false) => corpus::builtin_family(&name).ok_or_else(|| {
                    SplError::Store(format!(
                        "unknown builtin family '{name}'; available: {}",
                        builtin_families()
                            .iter()
                            .map(|f| f.name.as_str())
                            .collect::<Vec<_>>()
                            .join(", ")
                    ))
                })?,
                (None, None, true) => corpus::random_family(
                    &FamilyParams {
                        products: shape.products,
                        files: shape.files,
                        features: shape.features,
                        statements: shape.statements,
                    },
                    seed,
                ),
                _ => {
                    return Err(SplError::Store(
                        "synth needs exactly one of --family, --builtin, or --random".to_string(),
                    ))
                }
            };
            let products = corpus::synthesize(&spec, seed)?;
            for product in &products {
                for file in &product.files {
                    write_source(&out.join(&product.name), &file.path, &file.text)?;
                }
            }
            if let Some(path) = spec_out {
                let mut text = serde_json::to_string_pretty(&spec)?;
                text.push('\n');
                std::fs::write(&path, text)?;
            }
            println!(
                "synthesized family '{}': {} products under {}",
                spec.name,
                products.len(),
                out.display()
            );
            for product in &products {
                println!("  {} [{}]", product.name, product.features.join(","));
            }
            Ok(())
        }
    }
}

fn warn_all(warnings: &[String]) {
    for warning in warnings {
        eprintln!("WARN: {warning}");
    }
}

/// Collect the product's `.java` files, paths relative to `dir`, sorted.
fn read_product_dir(dir: &Path) -> Result<Vec<SourceFile>> {
    if !dir.is_dir() {
        return Err(SplError::Store(format!(
            "product directory {} does not exist",
            dir.display()
        )));
    }
    let mut files = Vec::new();
    for entry in walkdir::WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| SplError::Store(format!("walking {}: {e}", dir.display())))?;
        if !entry.file_type().is_file()
            || entry.path().extension().is_none_or(|ext| ext != "java")
        {
            continue;
        }
        let rel = entry
            .path()
            .strip_prefix(dir)
            .expect("walked entries live under dir")
            .to_string_lossy()
            .replace('\\', "/");
        let text = std::fs::read_to_string(entry.path())?;
        files.push(SourceFile { path: rel, text });
    }
    if files.is_empty() {
        return Err(SplError::Store(format!(
            "no .java files under {}",
            dir.display()
        )));
    }
    files.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(files)
}

fn write_source(root: &Path, rel: &str, text: &str) -> Result<()> {
    let path = root.join(rel);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(&path, text)?;
    Ok(())
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| SplError::Store(format!("reading {}: {e}", path.display())))
}

fn read_family(path: &Path) -> Result<FamilySpec> {
    FamilySpec::from_json(&read_text(path)?)
}

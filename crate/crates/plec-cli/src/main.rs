//! Command-line frontend: bundle validation, Euler cochains, pairings,
//! and fixture generation.  All rationals cross this boundary as exact
//! `"p/q"` strings, and every output file is canonical JSON, so equal
//! inputs always produce byte-identical artifacts.
//!
//! Exit codes: 0 on success, 1 when a well-formed input fails a check
//! (validation, engine errors, digest mismatches), 2 on unreadable or
//! malformed input and bad command lines.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use plec::doc::{
    cochain_document, cycle_document, input_digest, parse_cochain, parse_cycle, rational_string,
    to_canonical_json, BundleDocument, CochainDocument, CycleDocument,
};
use plec::engine::{
    base_fundamental_cycle, euler_cochain_for_bundle, pair_cochain_cycle, Formula,
};
use plec::fixtures::{
    base_boundary3, base_simplex2, base_solid3, gen_trivial, hopf_fixture, identity_order,
};

#[derive(Parser)]
#[command(
    name = "plec",
    version,
    about = "Exact rational Euler-class cochains for triangulated sphere bundles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a bundle document, printing one line per structural check.
    Validate { path: PathBuf },
    /// Compute the Euler cochain of a valid bundle document.
    Euler {
        path: PathBuf,
        /// Evaluation strategy.
        #[arg(long, value_enum)]
        formula: FormulaArg,
        /// Worker threads (defaults to one per core).
        #[arg(long)]
        jobs: Option<usize>,
        /// Output file (stdout when omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write the fundamental cycle of a bundle's closed base.
    Cycle {
        path: PathBuf,
        /// Output file (stdout when omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Pair a cochain document with a cycle document from the same bundle.
    Pair { cochain: PathBuf, cycle: PathBuf },
    /// Emit a bundle document.
    Generate {
        /// Bundle family.
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Base complex for the trivial kind.
        #[arg(long, value_enum, default_value_t = BaseArg::Simplex2)]
        base: BaseArg,
        /// Fiber polygon for the trivial kind, e.g. `cycle3`.
        #[arg(long, default_value = "cycle3")]
        fiber: String,
        /// Shuffles the staircase vertex order of the trivial kind.
        #[arg(long)]
        seed: Option<u64>,
        /// Output file (stdout when omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum FormulaArg {
    Harmonic,
    Winding,
    Necklace,
}

impl From<FormulaArg> for Formula {
    fn from(arg: FormulaArg) -> Formula {
        match arg {
            FormulaArg::Harmonic => Formula::Harmonic,
            FormulaArg::Winding => Formula::Winding,
            FormulaArg::Necklace => Formula::Necklace,
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum KindArg {
    Trivial,
    Hopf,
}

#[derive(Copy, Clone, ValueEnum)]
enum BaseArg {
    /// One solid triangle.
    Simplex2,
    /// Boundary of the 3-simplex (a 2-sphere).
    Boundary3,
    /// One solid tetrahedron.
    Solid3,
}

/// A command failure: `Check` exits 1, `Parse` exits 2.
enum Failure {
    Check(String),
    Parse(String),
}

impl Failure {
    fn exit(self) -> ExitCode {
        let (message, code) = match self {
            Failure::Check(message) => (message, 1),
            Failure::Parse(message) => (message, 2),
        };
        eprintln!("error: {message}");
        ExitCode::from(code)
    }
}

/// The bare variant name of an error's debug form, e.g. "FormulaUnsupported".
fn error_name(error: &impl std::fmt::Debug) -> String {
    let debug = format!("{error:?}");
    match debug.find(|c: char| c == '(' || c == '{' || c == ' ') {
        Some(end) => debug[..end].to_string(),
        None => debug,
    }
}

fn check_failure(error: &(impl std::fmt::Debug + std::fmt::Display)) -> Failure {
    Failure::Check(format!("{}: {error}", error_name(error)))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn parse_json<T: serde::de::DeserializeOwned>(bytes: &[u8], path: &Path) -> Result<T, Failure> {
    serde_json::from_slice(bytes).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), Failure> {
    match output {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::Check(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_bundle(path: &Path) -> Result<(BundleDocument, plec::bundle::TriangulatedBundle, String), Failure> {
    let bytes = read_bytes(path)?;
    let digest = input_digest(&bytes);
    let doc: BundleDocument = parse_json(&bytes, path)?;
    let bundle = doc.to_bundle().map_err(|e| check_failure(&e))?;
    Ok((doc, bundle, digest))
}

fn cmd_validate(path: &Path) -> Result<ExitCode, Failure> {
    let bytes = read_bytes(path)?;
    let doc: BundleDocument = parse_json(&bytes, path)?;
    let bundle = match doc.to_bundle() {
        Ok(bundle) => bundle,
        Err(e) => {
            println!("document: FAIL ({e})");
            return Ok(ExitCode::from(1));
        }
    };
    println!("document: PASS");
    let report = bundle.validate();
    print!("{}", report.render());
    Ok(if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_euler(
    path: &Path,
    formula: Formula,
    jobs: Option<usize>,
    output: Option<&Path>,
) -> Result<ExitCode, Failure> {
    let (doc, bundle, digest) = load_bundle(path)?;
    let report = bundle.validate();
    if !report.all_passed() {
        return Err(Failure::Check(format!(
            "bundle failed validation\n{}",
            report.render()
        )));
    }
    let cochain =
        euler_cochain_for_bundle(&bundle, formula, jobs).map_err(|e| check_failure(&e))?;
    let rendered = cochain_document(&cochain, &doc, env!("CARGO_PKG_VERSION"), &digest)
        .map_err(|e| check_failure(&e))?;
    emit(&to_canonical_json(&rendered).map_err(|e| check_failure(&e))?, output)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_cycle(path: &Path, output: Option<&Path>) -> Result<ExitCode, Failure> {
    let (_, bundle, digest) = load_bundle(path)?;
    let cycle = base_fundamental_cycle(bundle.base()).map_err(|e| check_failure(&e))?;
    if !plec::engine::simplicial_cycle_check(&cycle) {
        return Err(Failure::Check(
            "NotClosed: the base has no fundamental cycle".to_string(),
        ));
    }
    let rendered = cycle_document(&cycle, &digest);
    emit(&to_canonical_json(&rendered).map_err(|e| check_failure(&e))?, output)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_pair(cochain_path: &Path, cycle_path: &Path) -> Result<ExitCode, Failure> {
    let cochain_doc: CochainDocument = parse_json(&read_bytes(cochain_path)?, cochain_path)?;
    let cycle_doc: CycleDocument = parse_json(&read_bytes(cycle_path)?, cycle_path)?;
    let (cochain, cochain_digest) = parse_cochain(&cochain_doc)
        .map_err(|e| Failure::Parse(format!("{}: {e}", cochain_path.display())))?;
    let (cycle, cycle_digest) = parse_cycle(&cycle_doc)
        .map_err(|e| Failure::Parse(format!("{}: {e}", cycle_path.display())))?;
    if cochain_digest != cycle_digest {
        return Err(Failure::Check(format!(
            "input digests differ: cochain has {cochain_digest}, cycle has {cycle_digest}"
        )));
    }
    println!("{}", rational_string(&pair_cochain_cycle(&cochain, &cycle)));
    Ok(ExitCode::SUCCESS)
}

fn parse_fiber(text: &str) -> Result<usize, Failure> {
    let bad = || {
        Failure::Parse(format!(
            "--fiber expects cycle<m> with m >= 3, e.g. cycle3, got {text:?}"
        ))
    };
    let m: usize = text.strip_prefix("cycle").ok_or_else(bad)?.parse().map_err(|_| bad())?;
    if m < 3 {
        return Err(bad());
    }
    Ok(m)
}

fn cmd_generate(
    kind: KindArg,
    base: BaseArg,
    fiber: &str,
    seed: Option<u64>,
    output: Option<&Path>,
) -> Result<ExitCode, Failure> {
    let doc = match kind {
        KindArg::Hopf => BundleDocument::from_bundle(&hopf_fixture().bundle),
        KindArg::Trivial => {
            let m = parse_fiber(fiber)?;
            let base = match base {
                BaseArg::Simplex2 => base_simplex2(),
                BaseArg::Boundary3 => base_boundary3(),
                BaseArg::Solid3 => base_solid3(),
            };
            let mut order = identity_order(m);
            if let Some(seed) = seed {
                order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            }
            let bundle = gen_trivial(base, m, &order).map_err(|e| check_failure(&e))?;
            BundleDocument::from_bundle(&bundle)
        }
    };
    emit(&to_canonical_json(&doc).map_err(|e| check_failure(&e))?, output)?;
    Ok(ExitCode::SUCCESS)
}

fn run(command: Command) -> Result<ExitCode, Failure> {
    match command {
        Command::Validate { path } => cmd_validate(&path),
        Command::Euler {
            path,
            formula,
            jobs,
            output,
        } => cmd_euler(&path, formula.into(), jobs, output.as_deref()),
        Command::Cycle { path, output } => cmd_cycle(&path, output.as_deref()),
        Command::Pair { cochain, cycle } => cmd_pair(&cochain, &cycle),
        Command::Generate {
            kind,
            base,
            fiber,
            seed,
            output,
        } => cmd_generate(kind, base, &fiber, seed, output.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(code) => code,
        Err(failure) => failure.exit(),
    }
}

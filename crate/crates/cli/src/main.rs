//! `nodecomp`: synthesize, check, evaluate and export leave-one-out fold structures.
//!
//! Exit codes: 0 success, 1 validation failure (including bad flags), 2 infeasible latency,
//! 3 I/O error.

use std::fmt::Debug;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nodecomp::dp::{compare_golden, compute_tables, GOLDEN_TABLE};
use nodecomp::math::min_latency;
use nodecomp::oracle::{brute_force_min, verify_co_enumeration, verify_dp_small};
use nodecomp::structure::{leave_one_out_fold, BinaryOperator, LookupTable, Structure, STRUCTURE_FORMAT};
use nodecomp::synthesis::{construct_general, SynthesisError};
use nodecomp::ttree::{enum_cap, enumerate_ttrees_capped, TTree, TTREE_FORMAT};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Parser, Debug)]
#[command(name = "nodecomp", version, about = "Leave-one-out fold structure synthesizer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a least-complexity structure for n inputs within latency tau.
    Construct {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        tau: usize,
        /// Output file; stdout when absent. The manifest goes next to it.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Manifest file; defaults to `<out>.manifest.json` when `--out` is given.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Check a structure file and print the report.
    Validate {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Evaluate a structure and compare with direct per-output folds.
    Eval {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        op: Op,
        /// Comma-separated input values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "random")]
        inputs: Option<Vec<i64>>,
        /// Number of random input vectors.
        #[arg(long, requires = "seed")]
        random: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Lookup table file for `--op lut`.
        #[arg(long)]
        lut: Option<PathBuf>,
    },
    /// Compute the complexity table.
    Table {
        #[arg(long, default_value_t = 64)]
        n_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
        format: TableFormat,
        /// Diff against the bundled table; any difference is a validation failure.
        #[arg(long)]
        compare_golden: bool,
    },
    /// Write every T-tree, or every complexity-optimal structure, on n leaves.
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Render a structure or T-tree file as DOT, optionally re-serializing it.
    Export {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        dot_out: PathBuf,
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Run an exhaustive check.
    Oracle {
        #[arg(long, value_enum)]
        check: Check,
        /// Inputs for bruteforce and co-enum; largest n for dp-small.
        #[arg(long)]
        n: Option<usize>,
        /// Latency bound for bruteforce.
        #[arg(long)]
        tau: Option<usize>,
        /// Where bruteforce writes its witness structure.
        #[arg(long)]
        witness_out: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Format {
    Json,
    Dot,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Op {
    Min,
    Max,
    Sum,
    Xor,
    Lut,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Kind {
    Ttree,
    Co,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Check {
    Bruteforce,
    CoEnum,
    DpSmall,
}

#[derive(Debug)]
enum Failure {
    Validation(String),
    Infeasible(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Infeasible(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Infeasible(m) | Failure::Io(m) => m,
        }
    }
}

type Outcome = Result<(), Failure>;

fn invalid(e: impl ToString) -> Failure {
    Failure::Validation(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Construct { n, tau, out, format, manifest } => construct(n, tau, out, format, manifest),
        Command::Validate { input } => validate(&input),
        Command::Eval { input, op, inputs, random, seed, lut } => eval(&input, op, inputs, random, seed, lut),
        Command::Table { n_max, out, format, compare_golden } => table(n_max, out, format, compare_golden),
        Command::Enumerate { n, kind, out_dir } => enumerate(n, kind, &out_dir),
        Command::Export { input, dot_out, json_out } => export(&input, &dot_out, json_out),
        Command::Oracle { check, n, tau, witness_out } => oracle(check, n, tau, witness_out),
    }
}

fn construct(n: usize, tau: usize, out: Option<PathBuf>, format: Format, manifest: Option<PathBuf>) -> Outcome {
    if n < 2 {
        return Err(invalid(format!("--n must be at least 2, got {n}")));
    }
    let tables = compute_tables(n, tau).map_err(invalid)?;
    let built = construct_general(n, tau, &tables).map_err(|e| match e {
        SynthesisError::Infeasible { .. } => Failure::Infeasible(e.to_string()),
        other => invalid(other),
    })?;
    let text = match format {
        Format::Json => built.structure.to_json(),
        Format::Dot => built.structure.to_dot(),
    };
    let manifest_path = manifest.or_else(|| out.as_ref().map(|p| sibling(p, "manifest.json")));
    match &out {
        Some(p) => write(p, &text)?,
        None => println!("{text}"),
    }
    if let Some(p) = manifest_path {
        write(&p, &built.manifest.to_json())?;
    }
    eprintln!(
        "n = {n}, tau = {tau}: complexity {}, latency {}",
        built.structure.complexity(),
        built.structure.latency()
    );
    Ok(())
}

/// `dir/name.json` becomes `dir/name.json.<suffix>`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

fn load_structure(path: &Path) -> Result<Structure, Failure> {
    Structure::from_json(&read(path)?).map_err(invalid)
}

fn validate(path: &Path) -> Outcome {
    let s = load_structure(path)?;
    let report = s.validate();
    println!("{}", serde_json::to_string_pretty(&report).expect("report is plain data"));
    if report.is_for_y {
        println!("complexity {}, latency {}", s.complexity(), s.latency());
        Ok(())
    } else {
        Err(invalid(format!("{} does not compute the leave-one-out folds", path.display())))
    }
}

fn eval(
    path: &Path,
    op: Op,
    inputs: Option<Vec<i64>>,
    random: Option<usize>,
    seed: Option<u64>,
    lut: Option<PathBuf>,
) -> Outcome {
    let s = load_structure(path)?;
    if lut.is_some() != (op == Op::Lut) {
        return Err(invalid("--lut is required with --op lut and only then"));
    }
    if inputs.is_none() && random.is_none() {
        return Err(invalid("give --inputs or --random with --seed"));
    }
    let n = s.n();
    let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
    if let Some(seed) = seed {
        println!("seed: {seed}");
    }
    let mismatches = if op == Op::Lut {
        let table: LookupTable = serde_json::from_str(&read(lut.as_deref().expect("checked"))?).map_err(invalid)?;
        let size = table.size();
        let vectors: Vec<Vec<u16>> = match (inputs, rng.as_mut()) {
            (Some(v), _) => {
                let cast: Result<Vec<u16>, _> = v.iter().map(|&x| u16::try_from(x)).collect();
                match cast {
                    Ok(c) if c.iter().all(|&x| (x as usize) < size) => vec![c],
                    _ => return Err(invalid(format!("lookup inputs must lie in 0..{size}"))),
                }
            }
            (None, Some(r)) => (0..random.expect("checked")).map(|_| (0..n).map(|_| r.random_range(0..size as u16)).collect()).collect(),
            (None, None) => unreachable!("random requires seed"),
        };
        run_vectors(&s, &BinaryOperator::lookup(table), &vectors)?
    } else {
        let operator = match op {
            Op::Min => BinaryOperator::min(),
            Op::Max => BinaryOperator::max(),
            Op::Sum => BinaryOperator::sum(),
            Op::Xor => BinaryOperator::xor(),
            Op::Lut => unreachable!(),
        };
        let vectors: Vec<Vec<i64>> = match (inputs, rng.as_mut()) {
            (Some(v), _) => vec![v],
            (None, Some(r)) => (0..random.expect("checked"))
                .map(|_| (0..n).map(|_| r.random_range(-1_000_000..=1_000_000)).collect())
                .collect(),
            (None, None) => unreachable!("random requires seed"),
        };
        run_vectors(&s, &operator, &vectors)?
    };
    if mismatches == 0 {
        println!("fold check: ok");
        Ok(())
    } else {
        println!("fold check: {mismatches} mismatching vectors");
        Err(invalid("outputs differ from the direct folds"))
    }
}

fn run_vectors<T: Clone + PartialEq + Debug>(s: &Structure, op: &BinaryOperator<T>, vectors: &[Vec<T>]) -> Result<usize, Failure> {
    let mut mismatches = 0;
    for x in vectors {
        let y = s.evaluate(op, x).map_err(invalid)?;
        let want = leave_one_out_fold(op, x);
        println!("x = {x:?}");
        println!("y = {y:?}");
        if y != want {
            println!("expected {want:?}");
            mismatches += 1;
        }
    }
    Ok(mismatches)
}

fn table(n_max: usize, out: Option<PathBuf>, format: TableFormat, compare: bool) -> Outcome {
    if n_max < 2 {
        return Err(invalid(format!("--n-max must be at least 2, got {n_max}")));
    }
    let tables = compute_tables(n_max, min_latency(n_max) + 4).map_err(invalid)?;
    let text = match format {
        TableFormat::Csv => tables.to_csv(),
        TableFormat::Json => tables.to_json() + "\n",
    };
    match &out {
        Some(p) => write(p, &text)?,
        None => print!("{text}"),
    }
    if compare {
        let diffs = compare_golden(&tables, GOLDEN_TABLE).map_err(invalid)?;
        for d in &diffs {
            eprintln!("n = {} {}: expected {}, computed {}", d.n, d.column, d.expected, d.actual);
        }
        eprintln!("golden comparison: {} differences", diffs.len());
        if !diffs.is_empty() {
            return Err(invalid("computed table differs from the bundled one"));
        }
    }
    Ok(())
}

fn enumerate(n: usize, kind: Kind, out_dir: &Path) -> Outcome {
    let trees = enumerate_ttrees_capped(n, enum_cap()).map_err(invalid)?;
    fs::create_dir_all(out_dir).map_err(|e| Failure::Io(format!("{}: {e}", out_dir.display())))?;
    let mut count = 0usize;
    for (i, t) in trees.enumerate() {
        let (name, text) = match kind {
            Kind::Ttree => (format!("ttree-{n}-{:06}.json", i + 1), t.to_json()),
            Kind::Co => (format!("co-{n}-{:06}.json", i + 1), t.h().to_json()),
        };
        write(&out_dir.join(name), &text)?;
        count += 1;
    }
    println!("{count}");
    Ok(())
}

fn export(path: &Path, dot_out: &Path, json_out: Option<PathBuf>) -> Outcome {
    let text = read(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(invalid)?;
    let (dot, json) = match value.get("format").and_then(|f| f.as_str()) {
        Some(STRUCTURE_FORMAT) => {
            let s = Structure::from_json(&text).map_err(invalid)?;
            (s.to_dot(), s.to_json())
        }
        Some(TTREE_FORMAT) => {
            let t = TTree::from_json(&text).map_err(invalid)?;
            (t.to_dot(), t.to_json())
        }
        other => return Err(invalid(format!("unrecognized format {other:?}"))),
    };
    write(dot_out, &dot)?;
    if let Some(p) = json_out {
        write(&p, &json)?;
    }
    Ok(())
}

fn oracle(check: Check, n: Option<usize>, tau: Option<usize>, witness_out: Option<PathBuf>) -> Outcome {
    let (report, passed) = match check {
        Check::Bruteforce => {
            let n = n.ok_or_else(|| invalid("bruteforce needs --n"))?;
            let r = brute_force_min(n, tau).map_err(invalid)?;
            if let Some(p) = witness_out {
                write(&p, &r.witness.to_json())?;
            }
            let valid = r.witness.validate().is_for_y && r.witness.complexity() == r.min_complexity;
            let report = serde_json::json!({
                "n": r.n,
                "tau": r.tau,
                "min_complexity": r.min_complexity,
                "witness_latency": r.witness.latency(),
                "witness_valid": valid,
                "leaves_visited": r.leaves_visited,
            });
            (report, valid)
        }
        Check::CoEnum => {
            let r = verify_co_enumeration(n.unwrap_or(6)).map_err(invalid)?;
            (serde_json::to_value(&r).expect("plain data"), r.passed)
        }
        Check::DpSmall => {
            let r = verify_dp_small(n.unwrap_or(9)).map_err(invalid)?;
            (serde_json::to_value(&r).expect("plain data"), r.passed)
        }
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("value serializes"));
    if passed {
        Ok(())
    } else {
        Err(invalid("check failed"))
    }
}

//! `pba-extend`: classical extensions of partial probability theories.
//!
//! Exit codes: 0 ok or representable, 1 not representable (certificate
//! emitted), 2 input error, 3 method inapplicable, 4 internal error.

mod commands;
mod document;
mod error;
mod expr;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use pba_core::scalar::{set_float_tolerance, Rational};
use serde_json::{json, Value};

use commands::{Method, Nodes, Report};
use document::{declared_arithmetic, read_json, Arithmetic, FunctionDocument, PptDocument, QuantumDocument, SCHEMA};
use error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "pba-extend", version, about = "Classical extensions of partial probability theories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scalar type; defaults to the document's `arithmetic`, then exact.
    #[arg(long, global = true, value_enum)]
    arithmetic: Option<Arithmetic>,
    /// Absolute tolerance in float mode.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Sequence-length bound of the Horn–Tarski search.
    #[arg(long, global = true, default_value_t = 4)]
    max_len: usize,
    /// Seed for randomized drivers; every subcommand is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Largest denominator when rationalizing matrix-derived values.
    #[arg(long, global = true)]
    snap: Option<u64>,
    /// Add wall-clock timings to the output.
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Decide classical representability and emit a certificate.
    Check { input: PathBuf },
    /// Construct an extension with a chosen method.
    Extend {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "lp")]
        method: Method,
        /// Nodes of the compatibility graph for `--method tree`.
        #[arg(long, value_enum, default_value = "singletons")]
        nodes: Nodes,
    },
    /// Bell conditions for the 2×2 and 3×3 bipartite topologies.
    Bell { input: PathBuf },
    /// Facets of a correlation polytope given by monomials or contexts.
    Facets { input: PathBuf },
    /// Horn–Tarski check, bands and extension of a partial function.
    Ht { input: PathBuf },
    /// Free construction and empirical quotient over projections.
    Quotient {
        input: PathBuf,
        /// Comma-separated projection labels used as generators.
        #[arg(long, value_delimiter = ',')]
        generators: Option<Vec<String>>,
    },
    /// Compatibility graph, as JSON or DOT.
    Graph {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "singletons")]
        nodes: Nodes,
        /// Collapse cliques whose union lies in a context.
        #[arg(long)]
        merge: bool,
        /// Write DOT to this path (`-` for stdout instead of JSON).
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// PPT of a quantum state on a set of projections.
    Quantum { projections: PathBuf, state: Option<PathBuf> },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Check { .. } => "check",
            Command::Extend { .. } => "extend",
            Command::Bell { .. } => "bell",
            Command::Facets { .. } => "facets",
            Command::Ht { .. } => "ht",
            Command::Quotient { .. } => "quotient",
            Command::Graph { .. } => "graph",
            Command::Quantum { .. } => "quantum",
        }
    }
}

enum Output {
    Result(Report),
    Document(Value),
    Dot(String),
}

fn arithmetic(cli: &Cli, v: &Value) -> CliResult<Arithmetic> {
    Ok(cli.arithmetic.or(declared_arithmetic(v)?).unwrap_or(Arithmetic::Exact))
}

macro_rules! by_arithmetic {
    ($a:expr, $f:ident, $($arg:expr),*) => {
        match $a {
            Arithmetic::Exact => commands::$f::<Rational>($($arg),*),
            Arithmetic::Float => commands::$f::<f64>($($arg),*),
        }
    };
}

fn run(cli: &Cli) -> CliResult<Output> {
    let read = |p: &Path| read_json(p);
    match &cli.command {
        Command::Check { input } => {
            let v = read(input)?;
            let doc = PptDocument::parse(&v)?;
            Ok(Output::Result(by_arithmetic!(arithmetic(cli, &v)?, check, &doc)?))
        }
        Command::Extend { input, method, nodes } => {
            let v = read(input)?;
            let a = arithmetic(cli, &v)?;
            if v.get("three").is_some() {
                if *method != Method::Three {
                    return Err(CliError::Inapplicable("a three-observable document needs --method three".into()));
                }
                let doc = document::parse_as(&v)?;
                return Ok(Output::Result(by_arithmetic!(a, extend_three_document, &doc)?));
            }
            let doc = PptDocument::parse(&v)?;
            Ok(Output::Result(by_arithmetic!(a, extend, &doc, *method, *nodes)?))
        }
        Command::Bell { input } => {
            let v = read(input)?;
            let doc = PptDocument::parse(&v)?;
            Ok(Output::Result(by_arithmetic!(arithmetic(cli, &v)?, bell, &doc)?))
        }
        Command::Facets { input } => Ok(Output::Result(commands::facets(&read(input)?)?)),
        Command::Ht { input } => {
            let v = read(input)?;
            let doc: FunctionDocument = document::parse_as(&v)?;
            Ok(Output::Result(by_arithmetic!(arithmetic(cli, &v)?, ht, &doc, cli.max_len)?))
        }
        Command::Quotient { input, generators } => {
            let doc = QuantumDocument::parse(&read(input)?)?;
            Ok(Output::Result(commands::quotient(&doc, generators.as_deref(), cli.snap)?))
        }
        Command::Graph { input, nodes, merge, dot } => {
            let doc = PptDocument::parse(&read(input)?)?;
            let g = commands::graph(&doc, *nodes, *merge)?;
            match dot {
                Some(p) if p.as_os_str() == "-" => Ok(Output::Dot(g.dot)),
                Some(p) => {
                    std::fs::write(p, &g.dot).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
                    Ok(Output::Result(g.report))
                }
                None => {
                    let mut report = g.report;
                    report.body["dot"] = json!(g.dot);
                    Ok(Output::Result(report))
                }
            }
        }
        Command::Quantum { projections, state } => {
            let doc = QuantumDocument::parse(&read(projections)?)?;
            let state = state.as_deref().map(read).transpose()?;
            let a = cli.arithmetic.unwrap_or(if cli.snap.is_some() { Arithmetic::Exact } else { Arithmetic::Float });
            Ok(Output::Document(commands::quantum(&doc, state.as_ref(), a, cli.snap)?))
        }
    }
}

// a closed pipe is not an error worth reporting
fn print(v: &Value) {
    let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(v).expect("JSON values serialize"));
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(tol) = cli.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            eprintln!("--tol must be a positive number");
            return ExitCode::from(2);
        }
        set_float_tolerance(tol);
    }
    let start = Instant::now();
    let outcome = run(&cli);
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let command = cli.command.name();
    match outcome {
        Ok(Output::Result(report)) => {
            let mut out = json!({ "schema": SCHEMA, "command": command });
            if let (Value::Object(o), Value::Object(b)) = (&mut out, report.body) {
                o.extend(b);
            }
            if cli.timings {
                out["timings"] = json!({ "total_ms": elapsed });
            }
            print(&out);
            ExitCode::from(report.code)
        }
        Ok(Output::Document(doc)) => {
            print(&doc);
            if cli.timings {
                eprintln!("total_ms: {elapsed:.3}");
            }
            ExitCode::SUCCESS
        }
        Ok(Output::Dot(dot)) => {
            let _ = write!(std::io::stdout().lock(), "{dot}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("pba-extend {command}: {e}");
            print(&json!({
                "schema": SCHEMA,
                "command": command,
                "error": { "kind": e.kind(), "message": e.to_string() },
            }));
            ExitCode::from(e.exit_code())
        }
    }
}

//! Command-line front end: `pgl query`, `pgl check`, `pgl saturate`.
//!
//! [`run`] takes the argument list and output streams and returns the exit
//! status, so the binary is a thin wrapper.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use pgl_core::degrees::Degree;
use pgl_core::engine::{saturate, TraceNode};
use pgl_core::oracle::{least_specific_model, semantic_degree_in};
use pgl_core::semantics::{
    default_truth_grid, enumerate_interpretations, uniform_grid, SemanticsError, DEFAULT_MAX_SPACE,
};
use pgl_core::syntax::{parse_program, AtomId, Program};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RESOURCE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "pgl",
    version,
    about = "Possibilistic Gödel logic programs: queries, traces and oracle checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the degree of one goal, or of every `query` in the file.
    Query(QueryArgs),
    /// Parse and validate a program.
    Check { file: PathBuf },
    /// Print the degree of every atom.
    Saturate {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    pub file: PathBuf,
    /// Goal atom; defaults to the file's `query` statements.
    #[arg(long)]
    pub goal: Option<String>,
    /// Include the proof tree.
    #[arg(long)]
    pub trace: bool,
    /// Also compute the semantic degree.
    #[arg(long)]
    pub oracle: bool,
    /// Add the multiples of this step to the oracle's truth grid.
    #[arg(long, value_name = "RATIONAL")]
    pub grid_step: Option<Degree>,
    #[arg(long)]
    pub json: bool,
    /// Cap on the oracle's interpretation space.
    #[arg(long, value_name = "N", default_value_t = DEFAULT_MAX_SPACE)]
    pub max_space: usize,
    /// Report time spent per phase.
    #[arg(long)]
    pub timings: bool,
}

/// One answered goal; the `--json` payload.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryResult {
    pub goal: String,
    pub degree: Degree,
    pub trace: Option<TraceNode>,
    pub oracle_degree: Option<Degree>,
    /// Known only when the oracle ran.
    pub satisfiable: Option<bool>,
    /// Engine degree below the oracle degree; only when the oracle ran.
    pub divergence: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

/// Milliseconds per phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub parse_ms: f64,
    pub saturate_ms: f64,
    pub oracle_ms: Option<f64>,
}

impl Eq for Timings {}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomDegree {
    pub atom: String,
    pub degree: Degree,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Resource(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Resource(_) => EXIT_RESOURCE,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Resource(m) => m,
        }
    }
}

impl From<SemanticsError> for Failure {
    fn from(e: SemanticsError) -> Self {
        match e {
            SemanticsError::SpaceTooLarge { .. } => Failure::Resource(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

/// Runs the command line and returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Query(args) => query(&args),
        Command::Check { file } => check(&file),
        Command::Saturate { file, json } => saturate_all(&file, json),
    };
    match result {
        Ok(text) => match out.write_all(text.as_bytes()) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                EXIT_USAGE
            }
        },
        Err(failure) => {
            let _ = writeln!(err, "error: {}", failure.message());
            failure.code()
        }
    }
}

fn load(file: &Path) -> Result<Program, Failure> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", file.display())))?;
    parse_program(&text).map_err(|d| Failure::Usage(format!("{}:{d}", file.display())))
}

fn check(file: &Path) -> Result<String, Failure> {
    let p = load(file)?;
    let sorted = p.atoms().iter().filter(|a| a.sort.is_some()).count();
    let sorts = p.context().map_or(0, |c| c.sorts().len());
    Ok(format!(
        "ok: {} atoms ({sorted} sorted), {} clauses, {sorts} sorts\n",
        p.atoms().len(),
        p.clauses().len()
    ))
}

fn saturate_all(file: &Path, json: bool) -> Result<String, Failure> {
    let p = load(file)?;
    let state = saturate(&p).map_err(|e| Failure::Usage(e.to_string()))?;
    let rows: Vec<AtomDegree> = p
        .atom_ids()
        .map(|a| AtomDegree {
            atom: p.atom_name(a).to_string(),
            degree: state.degree(a),
        })
        .collect();
    if json {
        return Ok(to_json(&rows));
    }
    Ok(rows
        .iter()
        .map(|r| format!("{} {}\n", r.atom, r.degree))
        .collect())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text
}

fn millis(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1000.0
}

fn query(args: &QueryArgs) -> Result<String, Failure> {
    let start = Instant::now();
    let p = load(&args.file)?;
    let parse_ms = millis(start);

    let goals: Vec<AtomId> = match &args.goal {
        Some(name) => vec![p
            .atom_id(name)
            .ok_or_else(|| Failure::Usage(format!("unknown goal `{name}`")))?],
        None if p.queries().is_empty() => {
            return Err(Failure::Usage(
                "no goal: pass --goal or add a `query` statement".into(),
            ))
        }
        None => p.queries().to_vec(),
    };

    let start = Instant::now();
    let state = saturate(&p).map_err(|e| Failure::Usage(e.to_string()))?;
    let saturate_ms = millis(start);

    let mut oracle_ms = None;
    let model = if args.oracle {
        let start = Instant::now();
        let mut grid = default_truth_grid(&p)?;
        if let Some(step) = args.grid_step {
            grid.extend(uniform_grid(step)?);
        }
        let space = Arc::new(enumerate_interpretations(&p, &grid, args.max_space)?);
        let model = least_specific_model(&p, &space).map_err(|e| Failure::Usage(e.to_string()))?;
        oracle_ms = Some(millis(start));
        Some(model)
    } else {
        if args.grid_step.is_some() {
            return Err(Failure::Usage("--grid-step needs --oracle".into()));
        }
        None
    };

    let mut results = Vec::new();
    for goal in goals {
        let degree = state.degree(goal);
        let semantic = match &model {
            Some(m) => {
                Some(semantic_degree_in(m, &p, goal).map_err(|e| Failure::Usage(e.to_string()))?)
            }
            None => None,
        };
        results.push(QueryResult {
            goal: p.atom_name(goal).to_string(),
            degree,
            trace: args.trace.then(|| state.proof(goal).to_trace(&p)),
            oracle_degree: semantic.map(|s| s.degree),
            satisfiable: semantic.map(|s| s.satisfiable),
            divergence: semantic.map(|s| degree != s.degree),
            timings: args.timings.then_some(Timings {
                parse_ms,
                saturate_ms,
                oracle_ms,
            }),
        });
    }

    if args.json {
        return Ok(match (&args.goal, results.as_slice()) {
            (Some(_), [single]) => to_json(single),
            _ => to_json(&results),
        });
    }
    let bare = args.goal.is_some();
    Ok(results.iter().map(|r| render(r, bare)).collect())
}

/// Text form: the degree (prefixed by the goal unless `bare`), then
/// indented oracle, timing and trace lines.
pub fn render(result: &QueryResult, bare: bool) -> String {
    let mut text = String::new();
    if bare {
        let _ = writeln!(text, "{}", result.degree);
    } else {
        let _ = writeln!(text, "{} {}", result.goal, result.degree);
    }
    if let Some(d) = result.oracle_degree {
        let _ = writeln!(text, "  oracle {d}");
    }
    if let Some(s) = result.satisfiable {
        let _ = writeln!(text, "  satisfiable {s}");
    }
    if let Some(d) = result.divergence {
        let _ = writeln!(text, "  divergence {d}");
    }
    if let Some(t) = &result.timings {
        let _ = write!(
            text,
            "  timings parse {:.3} ms, saturate {:.3} ms",
            t.parse_ms, t.saturate_ms
        );
        if let Some(o) = t.oracle_ms {
            let _ = write!(text, ", oracle {o:.3} ms");
        }
        text.push('\n');
    }
    if let Some(trace) = &result.trace {
        render_trace(trace, 1, &mut text);
    }
    text
}

fn render_trace(node: &TraceNode, depth: usize, text: &mut String) {
    let _ = write!(
        text,
        "{}{} {} by {}",
        "  ".repeat(depth),
        node.goal,
        node.degree,
        node.rule
    );
    if let Some(c) = node.clause {
        let _ = write!(text, " (clause {c})");
    }
    for (name, value) in &node.side_conditions {
        let _ = write!(text, " {name}={value}");
    }
    text.push('\n');
    for premise in &node.premises {
        render_trace(premise, depth + 1, text);
    }
}

//! Command-line front end.
//!
//! [`run`] takes the full argument list (program name first) and returns the
//! exit code together with everything destined for stdout and stderr, so the
//! binary and the golden tests share one code path.
//!
//! Exit codes: `0` success, `1` a kill or mismatch where the caller asked for
//! a pass, `2` usage or parse errors.
//!
//! `SULLIVAN_COEFFS` sets the default coefficient set (e.g. `{-1,0,1}`) and
//! `SULLIVAN_MAX_DEGREE` the default degree bound for the `model` commands.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::Path;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::cohomology::{betti, BettiTable};
use crate::dsl::{parse_model, ParsedModel};
use crate::ellipticity::{enumerate_candidates, realizable, CoeffSet, RankVector, SearchOptions};
use crate::error::Error;
use crate::fibration::{fiber_rank_vectors, wang_fiber_betti};
use crate::pipeline::catalog::entry_from_model;
use crate::pipeline::{analyze, lookup, render_report, reproduce, AnalyzeOptions, CatalogEntry, Target};

pub const ENV_COEFFS: &str = "SULLIVAN_COEFFS";
pub const ENV_MAX_DEGREE: &str = "SULLIVAN_MAX_DEGREE";

pub const EXIT_OK: i32 = 0;
pub const EXIT_KILL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CommandOutcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CommandOutcome {
    fn ok(stdout: String) -> Self {
        CommandOutcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        let mut stderr = message.into();
        if !stderr.ends_with('\n') {
            stderr.push('\n');
        }
        CommandOutcome {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "sullivan", version, about = "Rational homotopy obstructions to fibrations and submersions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Inspect a model file.
    #[command(subcommand)]
    Model(ModelCommand),
    /// Rationally elliptic rank vectors.
    #[command(subcommand)]
    Elliptic(EllipticCommand),
    /// Exact sequences of a fibration.
    #[command(subcommand)]
    Fibration(FibrationCommand),
    /// Obstruction analysis.
    #[command(subcommand)]
    Check(CheckCommand),
    /// Run a canned analysis.
    Reproduce {
        /// table1, prop31, prop32, prop41, prop42, theorem-a or theorem-b.
        target: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Tree,
}

#[derive(Subcommand, Debug)]
enum ModelCommand {
    /// Validate a model: d^2 = 0, minimality, simple connectivity.
    Check {
        file: String,
        /// Degree bound for the d^2 check.
        #[arg(long)]
        max_degree: Option<u32>,
        /// Exit 1 unless every differential is decomposable.
        #[arg(long)]
        require_minimal: bool,
        /// Exit 1 if there is a generator of degree 1.
        #[arg(long)]
        require_simply_connected: bool,
    },
    /// Betti numbers up to a degree.
    Cohomology {
        file: String,
        /// Highest degree; falls back to SULLIVAN_MAX_DEGREE.
        #[arg(long)]
        max_degree: Option<u32>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Subcommand, Debug)]
enum EllipticCommand {
    /// Rank vectors of simply connected elliptic spaces of a dimension.
    Enumerate {
        /// Formal dimension.
        #[arg(long)]
        dim: u32,
        /// List every rank vector passing the numeric constraints.
        #[arg(long)]
        no_prune: bool,
        /// Coefficient set for the realizability search, e.g. {-1,0,1}.
        #[arg(long)]
        coeffs: Option<String>,
        /// Vanishing is checked up to this degree (default 2n+2).
        #[arg(long)]
        audit_bound: Option<u32>,
    },
}

#[derive(Subcommand, Debug)]
enum FibrationCommand {
    /// Fiber rank vectors allowed by the homotopy sequence.
    FiberRanks {
        /// Catalog name or rank vector such as 2:1,5:1.
        #[arg(long)]
        total: String,
        /// Catalog name or rank vector.
        #[arg(long)]
        base: String,
    },
    /// Fiber Betti tables allowed by the sequence over a sphere.
    Wang(WangArgs),
}

#[derive(Args, Debug)]
struct WangArgs {
    #[arg(long)]
    sphere: u32,
    #[arg(long)]
    total: String,
    #[arg(long)]
    fiber_dim: u32,
    /// Known fiber Betti numbers, `k=v,...`.
    #[arg(long)]
    known: Option<String>,
}

#[derive(Subcommand, Debug)]
enum CheckCommand {
    /// Can the total space submerse onto a base of dimension at most N?
    Submersion {
        /// Catalog name or model file.
        #[arg(long)]
        total: String,
        #[arg(long)]
        max_base_dim: u32,
        /// Re-derive the base table with the enumerator.
        #[arg(long)]
        live_table: bool,
        /// Coefficient set for the relative-model families.
        #[arg(long)]
        coeffs: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

/// Failure of a command body: either bad input (exit 2) or a library error
/// that also counts as bad input.
struct Usage(String);

impl From<Error> for Usage {
    fn from(e: Error) -> Self {
        Usage(format!("error: {e}"))
    }
}

type CmdResult = std::result::Result<CommandOutcome, Usage>;

pub fn run<I, T>(args: I) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                CommandOutcome::usage(text)
            } else {
                CommandOutcome::ok(text)
            };
        }
    };
    let result = match cli.command {
        Command::Model(ModelCommand::Check {
            file,
            max_degree,
            require_minimal,
            require_simply_connected,
        }) => model_check(&file, max_degree, require_minimal, require_simply_connected),
        Command::Model(ModelCommand::Cohomology {
            file,
            max_degree,
            format,
        }) => model_cohomology(&file, max_degree, format),
        Command::Elliptic(EllipticCommand::Enumerate {
            dim,
            no_prune,
            coeffs,
            audit_bound,
        }) => elliptic_enumerate(dim, !no_prune, coeffs.as_deref(), audit_bound),
        Command::Fibration(FibrationCommand::FiberRanks { total, base }) => fiber_ranks(&total, &base),
        Command::Fibration(FibrationCommand::Wang(args)) => wang(&args),
        Command::Check(CheckCommand::Submersion {
            total,
            max_base_dim,
            live_table,
            coeffs,
            format,
        }) => check_submersion(&total, max_base_dim, live_table, coeffs.as_deref(), format),
        Command::Reproduce { target, format } => run_reproduce(&target, format),
    };
    result.unwrap_or_else(|Usage(m)| CommandOutcome::usage(m))
}

fn read_model(path: &str) -> std::result::Result<ParsedModel, Usage> {
    let text = std::fs::read_to_string(path).map_err(|e| Usage(format!("error: cannot read {path}: {e}")))?;
    parse_model(&text).map_err(|e| Usage(format!("{path}:{e}")))
}

fn notes_to_stderr(parsed: &ParsedModel) -> String {
    parsed.notes.iter().map(|n| format!("note: {n}\n")).collect()
}

fn env_max_degree() -> std::result::Result<Option<u32>, Usage> {
    match std::env::var(ENV_MAX_DEGREE) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Usage(format!("error: {ENV_MAX_DEGREE}={v} is not a degree"))),
        Err(_) => Ok(None),
    }
}

fn coeff_set(flag: Option<&str>, default: CoeffSet) -> std::result::Result<CoeffSet, Usage> {
    match flag.map(str::to_string).or_else(|| std::env::var(ENV_COEFFS).ok()) {
        Some(text) => Ok(text.parse::<CoeffSet>()?),
        None => Ok(default),
    }
}

fn model_check(path: &str, max_degree: Option<u32>, require_minimal: bool, require_sc: bool) -> CmdResult {
    let parsed = read_model(path)?;
    let model = &parsed.model;
    let top = model.generators().iter().map(|g| g.degree).max().unwrap_or(0);
    let bound = match max_degree {
        Some(d) => d,
        None => env_max_degree()?.unwrap_or(2 * top + 2),
    };
    let report = model.validate(bound);
    let yes = |b: bool| if b { "yes" } else { "no" };
    let mut out = String::new();
    let _ = writeln!(out, "model {}: {} generators", model.name(), model.len());
    let _ = writeln!(out, "d^2 = 0: {}", yes(report.d_squared_zero));
    let _ = writeln!(out, "minimal: {}", yes(report.minimal));
    let _ = writeln!(out, "simply connected: {}", yes(report.simply_connected));
    for v in &report.violations {
        let kind = serde_json::to_value(&v.kind).expect("kinds serialize");
        let _ = writeln!(out, "  {}: {} ({})", v.generator, kind.as_str().unwrap_or_default(), v.term);
    }
    let pass = report.d_squared_zero
        && (!require_minimal || report.minimal)
        && (!require_sc || report.simply_connected);
    Ok(CommandOutcome {
        code: if pass { EXIT_OK } else { EXIT_KILL },
        stdout: out,
        stderr: notes_to_stderr(&parsed),
    })
}

fn model_cohomology(path: &str, max_degree: Option<u32>, format: Format) -> CmdResult {
    let parsed = read_model(path)?;
    let bound = match max_degree {
        Some(d) => d,
        None => env_max_degree()?.ok_or_else(|| {
            Usage(format!("error: --max-degree is required (or set {ENV_MAX_DEGREE})"))
        })?,
    };
    let table = betti(&parsed.model, bound);
    let stdout = match format {
        Format::Text => format!("{table}\n"),
        Format::Tree => tree(&serde_json::json!({
            "model": parsed.model.name(),
            "max_degree": bound,
            "betti": table.values(),
        })),
    };
    Ok(CommandOutcome {
        code: EXIT_OK,
        stdout,
        stderr: notes_to_stderr(&parsed),
    })
}

fn tree(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json values serialize");
    s.push('\n');
    s
}

fn elliptic_enumerate(dim: u32, prune: bool, coeffs: Option<&str>, audit_bound: Option<u32>) -> CmdResult {
    let options = SearchOptions {
        coeffs: coeff_set(coeffs, SearchOptions::default().coeffs)?,
        audit_bound,
        ..SearchOptions::default()
    };
    let vectors = enumerate_candidates(dim, prune, &options)?;
    Ok(CommandOutcome::ok(vectors.iter().map(|f| format!("{f}\n")).collect()))
}

/// A catalog entry, or an inline rank vector.
fn rank_spec(spec: &str) -> std::result::Result<RankVector, Usage> {
    if let Some(e) = lookup(spec) {
        return Ok(e.ranks);
    }
    spec.parse::<RankVector>()
        .map_err(|_| Usage(format!("error: `{spec}` is neither a catalog name nor a rank vector")))
}

fn fiber_ranks(total: &str, base: &str) -> CmdResult {
    let total = rank_spec(total)?;
    let base = rank_spec(base)?;
    let fibers = fiber_rank_vectors(&total, &base);
    Ok(CommandOutcome::ok(fibers.iter().map(|f| format!("{f}\n")).collect()))
}

/// Betti numbers of a catalog space, or of the first model the realizability
/// search finds for an inline rank vector.
fn betti_spec(spec: &str, bound: u32) -> std::result::Result<BettiTable, Usage> {
    if let Some(e) = lookup(spec) {
        return e
            .betti_up_to(bound)
            .ok_or_else(|| Usage(format!("error: `{spec}` has no Betti numbers")));
    }
    let ranks = rank_spec(spec)?;
    let verdict = realizable(&ranks, &SearchOptions::default())?;
    let model = verdict
        .witness
        .ok_or_else(|| Usage(format!("error: no elliptic model found for rank vector {ranks}")))?;
    Ok(betti(&model, bound))
}

fn parse_known(text: &str) -> std::result::Result<BTreeMap<u32, usize>, Usage> {
    let mut known = BTreeMap::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let parsed = part
            .split_once('=')
            .and_then(|(k, v)| Some((k.trim().parse::<u32>().ok()?, v.trim().parse::<usize>().ok()?)));
        let (k, v) = parsed.ok_or_else(|| Usage(format!("error: `{part}` is not `degree=value`")))?;
        known.insert(k, v);
    }
    Ok(known)
}

fn wang(args: &WangArgs) -> CmdResult {
    let total = betti_spec(&args.total, args.fiber_dim + args.sphere)?;
    let known = match &args.known {
        Some(k) => parse_known(k)?,
        None => BTreeMap::new(),
    };
    let tables = wang_fiber_betti(args.sphere, &total, args.fiber_dim, &known)?;
    let mut out = String::new();
    for t in &tables {
        let _ = writeln!(out, "{t}");
    }
    let stderr = if tables.is_empty() {
        "no fiber Betti table is consistent with the sequence\n".to_string()
    } else {
        String::new()
    };
    Ok(CommandOutcome {
        code: EXIT_OK,
        stdout: out,
        stderr,
    })
}

fn total_entry(spec: &str) -> std::result::Result<CatalogEntry, Usage> {
    if let Some(e) = lookup(spec) {
        return Ok(e);
    }
    if Path::new(spec).is_file() {
        let parsed = read_model(spec)?;
        return Ok(entry_from_model(parsed.model)?);
    }
    Err(Usage(format!("error: `{spec}` is neither a catalog name nor a model file")))
}

fn check_submersion(
    total: &str,
    max_base_dim: u32,
    live_table: bool,
    coeffs: Option<&str>,
    format: Format,
) -> CmdResult {
    let total = total_entry(total)?;
    let options = AnalyzeOptions {
        coeffs: coeff_set(coeffs, AnalyzeOptions::default().coeffs)?,
        live_table,
        ..AnalyzeOptions::default()
    };
    let report = analyze(&total, max_base_dim, &options)?;
    let stdout = match format {
        Format::Text => render_report(&report),
        Format::Tree => tree(&serde_json::to_value(&report).expect("reports serialize")),
    };
    let code = if report.survivors.is_empty() { EXIT_KILL } else { EXIT_OK };
    Ok(CommandOutcome {
        code,
        stdout,
        stderr: String::new(),
    })
}

fn run_reproduce(target: &str, format: Format) -> CmdResult {
    let t = Target::parse(target).ok_or_else(|| {
        let names: Vec<&str> = Target::ALL.iter().map(|t| t.name()).collect();
        Usage(format!("error: unknown target `{target}` (expected one of {})", names.join(", ")))
    })?;
    let r = reproduce(t)?;
    Ok(CommandOutcome::ok(match format {
        Format::Text => r.text,
        Format::Tree => tree(&r.tree),
    }))
}

//! `secomp` — build, verify, and bound three-user secure computations.
//!
//! Exit codes: 0 success (for `verify`: perfectly secure), 1 verification
//! found the protocol insecure, 2 parse/usage errors.

mod config;
mod inputs;
mod render;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use secomp_core::bounds::{
    asymptotic_bounds, improved_bounds_with, prelim_bounds, randomness_bounds, Strengthening,
};
use secomp_core::cmss::{cmss_bounds, sampling_bounds};
use secomp_core::golden::golden_table;
use secomp_core::protocol::{rate_quadruple, security_report, transcript_distribution, Protocol};
use secomp_core::Problem;

use config::{parse_float_token, Format, RunConfig};
use inputs::{apply_input_dist, load_problem, load_protocol, BuiltinArgs};
use render::{FamilyOutput, FamilyResult};

/// Failure carrying the process exit code: 1 insecure, 2 parse/usage error.
#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn new(code: u8, message: impl ToString) -> CliError {
        CliError { code, message: message.to_string() }
    }
    pub fn parse(message: impl ToString) -> CliError {
        CliError::new(2, message)
    }
    /// An engine rejected the request (bad parameters, inapplicable family).
    pub fn run(message: impl ToString) -> CliError {
        CliError::new(2, message)
    }
    pub fn insecure(message: impl ToString) -> CliError {
        CliError::new(1, message)
    }
}

#[derive(Parser)]
#[command(
    name = "secomp",
    version,
    about = "Exact simulation and lower bounds for three-user secure computation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a built-in instance and print it as JSON.
    Build(BuildArgs),
    /// Check a protocol against a problem: exact correctness and privacy.
    Verify(VerifyArgs),
    /// Evaluate lower-bound families on a problem.
    Bounds(BoundsArgs),
    /// Recompute the full reproduction table.
    GoldenTable(GoldenArgs),
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    builtin: BuiltinArgs,
    /// Also write the problem JSON to this file.
    #[arg(long, value_name = "FILE")]
    emit_problem: Option<String>,
    /// Also write the protocol JSON to this file.
    #[arg(long, value_name = "FILE")]
    emit_protocol: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    builtin: BuiltinArgs,
    /// Problem description JSON (instead of, or overriding, --builtin).
    #[arg(long, value_name = "FILE")]
    problem: Option<String>,
    /// Protocol description JSON (instead of, or overriding, --builtin).
    #[arg(long, value_name = "FILE")]
    protocol: Option<String>,
    /// Replace the input law: `uniform`, `v1,…-product`, or `v1,…-joint`.
    #[arg(long, value_name = "SPEC")]
    input_dist: Option<String>,
    /// Output format.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    builtin: BuiltinArgs,
    /// Problem description JSON (instead of --builtin).
    #[arg(long, value_name = "FILE")]
    problem: Option<String>,
    /// Replace the input law: `uniform`, `v1,…-product`, or `v1,…-joint`.
    #[arg(long, value_name = "SPEC")]
    input_dist: Option<String>,
    /// Comma-separated families: prelim, improved, conditional, randomness,
    /// asymptotic, cmss, sampling, all.
    #[arg(long, value_name = "LIST", default_value = "all")]
    theorems: String,
    #[command(flatten)]
    run: RunFlags,
}

#[derive(Args)]
struct GoldenArgs {
    #[command(flatten)]
    run: RunFlags,
}

/// Search settings: a config file overridden by explicit flags.
#[derive(Args)]
struct RunFlags {
    /// JSON file with {"seed", "restarts", "floors", "tolerance", "output-format"}.
    #[arg(long, value_name = "FILE")]
    config: Option<String>,
    /// Search seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Random restarts per search.
    #[arg(long)]
    restarts: Option<usize>,
    /// Comma-separated simplex floors, strictly decreasing in (0, 1/2).
    #[arg(long, value_name = "LIST")]
    floors: Option<String>,
    /// Verdict tolerance for tight/gap annotations.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Output format.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl RunFlags {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut rc = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            rc.seed = seed;
        }
        if let Some(restarts) = self.restarts {
            rc.restarts = restarts;
        }
        if let Some(floors) = &self.floors {
            let parsed: Vec<f64> =
                floors.split(',').map(parse_float_token).collect::<Result<_, _>>()?;
            rc.set_floors(&parsed);
        }
        if let Some(tolerance) = self.tolerance {
            rc.tolerance = tolerance;
        }
        if let Some(format) = self.format {
            rc.output_format = format;
        }
        rc.validate()?;
        Ok(rc)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_thread_pool() {
        eprintln!("error: {}", e.message);
        return ExitCode::from(e.code);
    }
    let result = match cli.command {
        Command::Build(args) => cmd_build(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::GoldenTable(args) => cmd_golden_table(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

/// Cap engine parallelism when SECOMP_THREADS is set.
fn init_thread_pool() -> Result<(), CliError> {
    match std::env::var("SECOMP_THREADS") {
        Err(_) => Ok(()),
        Ok(v) => {
            let n: usize = v
                .parse()
                .ok()
                .filter(|n| *n >= 1)
                .ok_or_else(|| {
                    CliError::parse(format!("SECOMP_THREADS must be a positive integer, got `{v}`"))
                })?;
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::parse(format!("thread pool: {e}")))
        }
    }
}

// ---------------------------------------------------------------------------
// build
// ---------------------------------------------------------------------------

fn cmd_build(args: BuildArgs) -> Result<(), CliError> {
    let built = args.builtin.build()?;
    let problem_json = built.problem.to_json();
    let protocol_json = built.protocol.to_json();
    if let Some(path) = &args.emit_problem {
        std::fs::write(path, &problem_json)
            .map_err(|e| CliError::parse(format!("cannot write `{path}`: {e}")))?;
    }
    if let Some(path) = &args.emit_protocol {
        std::fs::write(path, &protocol_json)
            .map_err(|e| CliError::parse(format!("cannot write `{path}`: {e}")))?;
    }
    let combined = json!({
        "block_length": built.block_length,
        "problem": serde_json::from_str::<Value>(&problem_json).expect("problem round-trips"),
        "protocol": serde_json::from_str::<Value>(&protocol_json).expect("protocol round-trips"),
    });
    println!("{}", serde_json::to_string_pretty(&combined).expect("build output serializes"));
    Ok(())
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

/// Resolve the (problem, protocol, block_length) triple from builtin flags
/// and/or files, with files taking precedence.
fn resolve_pair(
    builtin: &BuiltinArgs,
    problem: Option<&str>,
    protocol: Option<&str>,
) -> Result<(Problem, Protocol, usize), CliError> {
    let built = match builtin.builtin {
        Some(_) => Some(builtin.build()?),
        None => None,
    };
    let block_length = built.as_ref().map_or(1, |b| b.block_length);
    let (base_problem, base_protocol) = match built {
        Some(b) => (Some(b.problem), Some(b.protocol)),
        None => (None, None),
    };
    let problem = match problem {
        Some(path) => load_problem(path)?,
        None => base_problem.ok_or_else(|| {
            CliError::parse("no problem given: pass --builtin or --problem FILE")
        })?,
    };
    let protocol = match protocol {
        Some(path) => load_protocol(path)?,
        None => base_protocol.ok_or_else(|| {
            CliError::parse("no protocol given: pass --builtin or --protocol FILE")
        })?,
    };
    Ok((problem, protocol, block_length))
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    let (mut problem, protocol, block_length) =
        resolve_pair(&args.builtin, args.problem.as_deref(), args.protocol.as_deref())?;
    if let Some(spec) = &args.input_dist {
        problem = apply_input_dist(problem, spec)?;
    }
    // Protocol/problem incompatibilities surface here; they are verification
    // failures (the protocol does not securely compute this problem), not
    // parse errors.
    let td = transcript_distribution(&protocol, problem.input())
        .map_err(|e| CliError::insecure(format!("protocol cannot run on this problem: {e}")))?;
    let report = security_report(&td, &problem)
        .map_err(|e| CliError::insecure(format!("verification failed: {e}")))?;
    let rates = rate_quadruple(&td, block_length)
        .map_err(|e| CliError::insecure(format!("rate computation failed: {e}")))?;

    let format = args.format.unwrap_or(Format::Markdown);
    let text = match format {
        Format::Json => render::verify_json(&report, &rates, block_length),
        Format::Csv => render::verify_csv(&report, &rates),
        Format::Markdown => render::verify_markdown(&report, &rates, block_length),
    };
    print!("{text}");
    if text.as_bytes().last() != Some(&b'\n') {
        println!();
    }
    if report.perfectly_secure() {
        Ok(())
    } else {
        Err(CliError::insecure("protocol is not perfectly secure for this problem"))
    }
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

const FAMILIES: [&str; 7] =
    ["prelim", "improved", "conditional", "randomness", "asymptotic", "cmss", "sampling"];

fn parse_theorems(list: &str) -> Result<(Vec<&'static str>, bool), CliError> {
    let mut chosen = Vec::new();
    let mut explicit = true;
    for token in list.split(',') {
        let token = token.trim().to_ascii_lowercase();
        if token == "all" {
            explicit = false;
            for f in FAMILIES {
                if !chosen.contains(&f) {
                    chosen.push(f);
                }
            }
            continue;
        }
        match FAMILIES.iter().find(|f| **f == token) {
            Some(f) => {
                if !chosen.contains(f) {
                    chosen.push(f);
                }
            }
            None => {
                return Err(CliError::parse(format!(
                    "unknown theorem family `{token}`; valid: {}, all",
                    FAMILIES.join(", ")
                )))
            }
        }
    }
    if chosen.is_empty() {
        return Err(CliError::parse("no theorem families selected"));
    }
    Ok((chosen, explicit))
}

fn run_family(
    name: &str,
    problem: &Problem,
    config: &secomp_core::bounds::OptimizerConfig,
) -> Result<FamilyOutput, String> {
    let err = |e: &dyn std::fmt::Display| e.to_string();
    match name {
        "prelim" => prelim_bounds(problem).map(FamilyOutput::Bound).map_err(|e| err(&e)),
        "improved" => improved_bounds_with(problem, config, Strengthening::Never)
            .map(FamilyOutput::Bound)
            .map_err(|e| err(&e)),
        "conditional" => improved_bounds_with(problem, config, Strengthening::Auto)
            .map(FamilyOutput::Bound)
            .map_err(|e| err(&e)),
        "randomness" => {
            randomness_bounds(problem, config).map(FamilyOutput::Randomness).map_err(|e| err(&e))
        }
        "asymptotic" => asymptotic_bounds(problem).map(FamilyOutput::Bound).map_err(|e| err(&e)),
        "cmss" => {
            let joint = problem.joint().map_err(|e| err(&e))?;
            cmss_bounds(&joint, config).map(FamilyOutput::Bound).map_err(|e| err(&e))
        }
        "sampling" => {
            let joint = problem.joint().map_err(|e| err(&e))?;
            sampling_bounds(&joint).map(FamilyOutput::Bound).map_err(|e| err(&e))
        }
        other => Err(format!("unknown family `{other}`")),
    }
}

fn cmd_bounds(args: BoundsArgs) -> Result<(), CliError> {
    let rc = args.run.resolve()?;
    let optimizer = rc.optimizer()?;
    let (families, explicit) = parse_theorems(&args.theorems)?;

    let mut problem = match &args.problem {
        Some(path) => load_problem(path)?,
        None => args.builtin.build()?.problem,
    };
    if let Some(spec) = &args.input_dist {
        problem = apply_input_dist(problem, spec)?;
    }

    let mut results = Vec::new();
    for name in families {
        match run_family(name, &problem, &optimizer) {
            Ok(output) => results.push(FamilyResult { name, output }),
            Err(reason) if explicit => {
                return Err(CliError::run(format!("family `{name}` does not apply: {reason}")));
            }
            Err(reason) => {
                results.push(FamilyResult { name, output: FamilyOutput::Skipped(reason) })
            }
        }
    }

    let base = args.builtin.symbol_base();
    let text = match rc.output_format {
        Format::Json => render::bounds_json(&results, base),
        Format::Csv => render::bounds_csv(&results),
        Format::Markdown => render::bounds_markdown(&results, base),
    };
    print!("{text}");
    if text.as_bytes().last() != Some(&b'\n') {
        println!();
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// golden-table
// ---------------------------------------------------------------------------

fn cmd_golden_table(args: GoldenArgs) -> Result<(), CliError> {
    let rc = args.run.resolve()?;
    let optimizer = rc.optimizer()?;
    let table = golden_table(&optimizer).map_err(CliError::run)?;
    let text = match rc.output_format {
        Format::Json => table.to_json(),
        Format::Csv => render::golden_csv(&table),
        Format::Markdown => render::golden_markdown(&table, rc.tolerance),
    };
    print!("{text}");
    if text.as_bytes().last() != Some(&b'\n') {
        println!();
    }
    Ok(())
}

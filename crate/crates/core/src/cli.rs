//! Command-line front end. [`run`] returns the process exit status.
//!
//! | status | meaning |
//! |---|---|
//! | 0 | success |
//! | 1 | `optimal`: some undecided mode remains |
//! | 2 | usage, I/O, parse or modes-file error |
//! | 3 | resource limit exceeded |
//! | 4 | `analyze`: some condition was not confirmed by the oracle |

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::confirm::{ConfirmConfig, DEFAULT_DEPTH, DEFAULT_SAMPLES, DEFAULT_SEED};
use crate::error::Error;
use crate::loops::{InferenceConfig, DEFAULT_PAIR_CAP, DEFAULT_PASSES};
use crate::modes::parse_modes;
use crate::oracle::{run_query, QueryOutcome};
use crate::parser::{parse_program, parse_query};
use crate::report::{analyze, AnalyzeOptions, Fixpoint};
use crate::term::Program;
use crate::unfold::{tp_beta_upto, UnfoldConfig, DEFAULT_POOL_CAP};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_OPTIMAL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_UNCONFIRMED: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "loopfinder",
    version,
    about = "Infer left-looping atomic queries of pure logic programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the stamped binary-clause pool.
    Unfold(UnfoldArgs),
    /// Infer looping conditions and looping modes.
    Analyze(AnalyzeArgs),
    /// Check terminating multi-modes for optimality.
    Optimal(AnalyzeArgs),
    /// Run a query with the leftmost interpreter and print the derivation.
    Trace(TraceArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Debug)]
struct UnfoldArgs {
    program: PathBuf,
    #[arg(long, default_value_t = 2)]
    max: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long, default_value_t = DEFAULT_POOL_CAP)]
    pool_cap: usize,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    program: PathBuf,
    #[arg(long, default_value_t = 2)]
    max: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long, default_value_t = DEFAULT_DEPTH as u64, value_parser = clap::value_parser!(u64).range(1..))]
    oracle_depth: u64,
    #[arg(long)]
    no_oracle: bool,
    /// Random class members checked per condition.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_POOL_CAP)]
    pool_cap: usize,
    #[arg(long, default_value_t = DEFAULT_PAIR_CAP)]
    pair_cap: usize,
    #[arg(long, default_value_t = DEFAULT_PASSES)]
    passes: usize,
    /// JSON object mapping `name/arity` to a list of terminating modes.
    #[arg(long)]
    modes: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TraceArgs {
    program: PathBuf,
    query: String,
    #[arg(long, default_value_t = 100)]
    steps: usize,
}

fn read(path: &Path) -> Result<String, Error> {
    Ok(std::fs::read_to_string(path)?)
}

fn load_program(path: &Path) -> Result<Program, Error> {
    let src = read(path)?;
    parse_program(&src).map_err(Error::from)
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Resource(_) => EXIT_RESOURCE,
        Error::Parse(_) | Error::Modes(_) | Error::Io(_) => EXIT_INPUT,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Unfold(a) => cmd_unfold(&a, out),
        Command::Analyze(a) => cmd_analyze(&a, false, out),
        Command::Optimal(a) => cmd_analyze(&a, true, out),
        Command::Trace(a) => cmd_trace(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "loopfinder: {e}");
            exit_code(&e)
        }
    }
}

#[derive(serde::Serialize)]
struct UnfoldJson {
    program: String,
    max: usize,
    clauses: Vec<StampedJson>,
    fixpoint: Fixpoint,
}

#[derive(serde::Serialize)]
struct StampedJson {
    stamp: usize,
    clause: String,
}

fn cmd_unfold(a: &UnfoldArgs, out: &mut dyn Write) -> Result<i32, Error> {
    let program = load_program(&a.program)?;
    let pool = tp_beta_upto(&program, a.max, &UnfoldConfig { pool_cap: a.pool_cap })?;
    match a.format {
        Format::Text => {
            write!(out, "{}", pool.dump())?;
            match pool.fixpoint() {
                Some(k) => writeln!(out, "% fixpoint: {k}")?,
                None => writeln!(out, "% fixpoint: not reached")?,
            }
        }
        Format::Json => {
            let j = UnfoldJson {
                program: a.program.display().to_string(),
                max: a.max,
                clauses: pool
                    .entries()
                    .iter()
                    .map(|e| StampedJson {
                        stamp: e.stamp,
                        clause: e.key.clone(),
                    })
                    .collect(),
                fixpoint: Fixpoint(pool.fixpoint()),
            };
            writeln!(out, "{}", serde_json::to_string_pretty(&j).expect("serializable"))?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_analyze(a: &AnalyzeArgs, optimal: bool, out: &mut dyn Write) -> Result<i32, Error> {
    let program = load_program(&a.program)?;
    let terminating = match &a.modes {
        Some(path) => parse_modes(&read(path)?, &program)?,
        None => Default::default(),
    };
    let opts = AnalyzeOptions {
        max: a.max,
        inference: InferenceConfig {
            unfold: UnfoldConfig { pool_cap: a.pool_cap },
            pair_cap: a.pair_cap,
            passes: a.passes,
        },
        oracle: (!a.no_oracle).then(|| ConfirmConfig {
            depth: a.oracle_depth as usize,
            samples: a.samples,
            seed: a.seed,
            ..ConfirmConfig::default()
        }),
        terminating,
    };
    let analysis = analyze(&program, &opts)?;
    let name = a.program.display().to_string();
    match a.format {
        Format::Text => write!(out, "{}", analysis.render_text(&name))?,
        Format::Json => write!(out, "{}", analysis.render_json(&name))?,
    }
    Ok(if optimal {
        if analysis.result.is_optimal() {
            EXIT_OK
        } else {
            EXIT_NOT_OPTIMAL
        }
    } else if analysis.all_confirmed() {
        EXIT_OK
    } else {
        EXIT_UNCONFIRMED
    })
}

fn cmd_trace(a: &TraceArgs, out: &mut dyn Write) -> Result<i32, Error> {
    let program = load_program(&a.program)?;
    let q = parse_query(&a.query)?;
    match run_query(program.clauses(), &q, a.steps) {
        QueryOutcome::Success { answer, trace } => {
            write!(out, "{}", trace.render())?;
            writeln!(out, "success: {answer}")?;
        }
        QueryOutcome::Failure => writeln!(out, "failure")?,
        QueryOutcome::DepthExceeded => writeln!(out, "step budget of {} exhausted", a.steps)?,
    }
    Ok(EXIT_OK)
}

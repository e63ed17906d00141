use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use oddbraid_cli::checks::{select, Context, REGISTRY};
use oddbraid_cli::commands::{self, emit, parse_n, report_json, run_checks, Object, ParamSource};

#[derive(Parser)]
#[command(
    name = "oddbraid",
    version,
    about = "Build and verify nested-projector braid matrices for odd N"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
struct Source {
    /// Odd dimension N ≥ 3 (default 3, or taken from --params).
    #[arg(long, value_parser = parse_n)]
    n: Option<usize>,
    /// Seed for random exponents when --params is absent.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Parameter set JSON.
    #[arg(long)]
    params: Option<PathBuf>,
}

impl From<&Source> for ParamSource {
    fn from(s: &Source) -> Self {
        ParamSource {
            n: s.n,
            seed: s.seed,
            params: s.params.clone(),
        }
    }
}

#[derive(Args, Clone, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    source: Source,
    /// Checks to run: comma list of names, or `all`.
    #[arg(long, value_delimiter = ',')]
    checks: Vec<String>,
    /// Negative checks to run: comma list of names, or `all`.
    #[arg(long, value_delimiter = ',')]
    negative: Vec<String>,
    /// θ sample for sampled checks; repeatable.
    #[arg(long, allow_negative_numbers = true)]
    theta: Vec<f64>,
    /// Truncation order of the exponential series.
    #[arg(long)]
    order: Option<u32>,
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random parameter set.
    GenParams {
        /// Odd dimension N ≥ 3.
        #[arg(long, value_parser = parse_n, default_value_t = commands::DEFAULT_N)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output file (stdout if absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export an object as JSON.
    Build {
        #[arg(value_enum)]
        object: Object,
        #[command(flatten)]
        source: Source,
        /// Spectral coefficient JSON, replacing the parameter set.
        #[arg(long, conflicts_with = "params")]
        coefficients: Option<PathBuf>,
        /// Output file (stdout if absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run checks and print one PASS/FAIL line each.
    Verify(VerifyArgs),
    /// Run checks and write the JSON report.
    Report(VerifyArgs),
    /// List the registered checks.
    Checks,
}

fn verify(args: &VerifyArgs, print_lines: bool) -> Result<bool> {
    let selected = select(&args.checks, &args.negative).map_err(anyhow::Error::msg)?;
    let params = ParamSource::from(&args.source).load()?;
    println!(
        "N = {}, {} parameters, {} checks",
        params.dim(),
        params.count(),
        selected.len()
    );
    let theta = (!args.theta.is_empty()).then(|| args.theta.clone());
    let ctx = Context::new(params, theta, args.order);
    let outcomes = run_checks(&ctx, &selected, |o| {
        if print_lines {
            println!("{}", o.line());
            if !o.passed() {
                println!("{}", o.report);
            }
        }
    });
    let passed = outcomes.iter().filter(|o| o.passed()).count();
    println!("{passed}/{} checks passed", outcomes.len());
    match &args.out {
        Some(path) => emit(Some(path), &report_json(&outcomes)?)?,
        None if !print_lines => emit(None, &report_json(&outcomes)?)?,
        None => {}
    }
    Ok(passed == outcomes.len())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::GenParams { n, seed, out } => {
            let params = commands::gen_params(n, seed)?;
            let text = commands::to_json(&params.to_json())?;
            let summary = format!("{} parameters for N = {n}", params.count());
            match out {
                Some(path) => {
                    emit(Some(&path), &text)?;
                    println!("{summary}");
                }
                None => {
                    emit(None, &text)?;
                    eprintln!("{summary}");
                }
            }
            Ok(true)
        }
        Command::Build {
            object,
            source,
            coefficients,
            out,
        } => {
            let text =
                commands::build(object, &ParamSource::from(&source), coefficients.as_deref())?;
            emit(out.as_deref(), &text)?;
            Ok(true)
        }
        Command::Verify(args) => verify(&args, true),
        Command::Report(args) => verify(&args, false),
        Command::Checks => {
            for c in REGISTRY {
                let kind = if c.expected_failure {
                    "negative"
                } else {
                    "identity"
                };
                println!("{:<20} {kind:<9} {}", c.name, c.identity);
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

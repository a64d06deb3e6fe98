mod error;
mod evidence_io;
mod resolve;
mod scenario_config;

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use domino_core::simulate::{format_table, run_grid};
use domino_core::validation::{run_suite, SuiteOptions, DEFAULT_SUITES, SUITES};

use crate::error::{CliError, CliResult};
use crate::evidence_io::{boundary_value, read_evidence, write_rejections};
use crate::resolve::{resolve, Dependence, ModeArg, ProcArg, RunRequest, TestArg};
use crate::scenario_config::parse_config;

const BRUTE_CAP_ENV: &str = "DOMINO_BRUTE_CAP";

/// k-boundary FDR control with the Domino procedure and its baselines.
#[derive(Debug, Parser)]
#[command(name = "domino", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Apply a procedure to an evidence CSV (`index,p_value` or `index,e_value`).
    Run {
        input: PathBuf,
        #[arg(long = "proc", value_enum)]
        procedure: ProcArg,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_enum)]
        test: Option<TestArg>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Dependence among null p-values; picks the default local test at k = 1.
        #[arg(long, value_enum)]
        dependence: Option<Dependence>,
        /// Write the rejection CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a simulation grid described by a scenario file.
    Simulate {
        config: PathBuf,
        /// Replaces the `seed` key of the scenario file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the oracle-agreement suites.
    Validate {
        /// Suite to run (repeatable). Defaults to every suite except
        /// `fastpath-divergence`.
        #[arg(long = "suite")]
        suites: Vec<String>,
        #[arg(long, default_value_t = SuiteOptions::default().seed)]
        seed: u64,
        /// Random instances per suite.
        #[arg(long, default_value_t = SuiteOptions::default().instances)]
        instances: usize,
    },
}

fn brute_cap_from_env() -> CliResult<Option<usize>> {
    match std::env::var(BRUTE_CAP_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Parse(format!("{BRUTE_CAP_ENV} = `{v}` is not a count"))),
        Err(_) => Ok(None),
    }
}

fn open_out(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn cmd_run(input: &Path, req: RunRequest, out: Option<&Path>) -> CliResult<()> {
    let file = read_evidence(File::open(input)?)?;
    let resolved = resolve(&req, file.evidence.kind())?;
    let rejected = resolved.apply(&file.evidence)?;

    write_rejections(open_out(out)?, &file, &rejected)?;

    let boundary = boundary_value(&file.evidence, &rejected).map_or("none".to_string(), |v| v.to_string());
    let summary = format!(
        "rejected: {}\nboundary: {boundary}\nconfig: {}\n",
        rejected.len(),
        resolved.describe()
    );
    if out.is_some() {
        io::stdout().write_all(summary.as_bytes())?;
    } else {
        io::stderr().write_all(summary.as_bytes())?;
    }
    Ok(())
}

fn cmd_simulate(config: &Path, seed: Option<u64>, out: Option<&Path>) -> CliResult<()> {
    let text = std::fs::read_to_string(config)?;
    let blocks = parse_config(&text, seed)?;
    let mut reports = Vec::new();
    for block in &blocks {
        reports.extend(run_grid(&block.scenarios, &block.procedures)?);
    }
    let table = format_table(&reports)?;
    open_out(out)?.write_all(table.as_bytes())?;
    Ok(())
}

fn cmd_validate(suites: &[String], opts: SuiteOptions) -> CliResult<()> {
    let names: Vec<&str> = if suites.is_empty() {
        DEFAULT_SUITES.to_vec()
    } else {
        suites.iter().map(String::as_str).collect()
    };
    if let Some(bad) = names.iter().find(|n| !SUITES.contains(n)) {
        return Err(CliError::Parse(format!(
            "unknown suite `{bad}` (known: {})",
            SUITES.join(", ")
        )));
    }
    let mut failed = 0;
    let mut stdout = io::stdout().lock();
    for name in names {
        let report = run_suite(name, &opts)?;
        let status = if report.passed { "PASS" } else { "FAIL" };
        writeln!(
            stdout,
            "{status} {}: {} checks, {} failures",
            report.name, report.checks, report.failures
        )?;
        if !report.detail.is_empty() {
            writeln!(stdout, "  {}", report.detail)?;
        }
        failed += usize::from(!report.passed);
    }
    if failed > 0 {
        return Err(CliError::SuiteFailed(failed));
    }
    Ok(())
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run { input, procedure, k, alpha, test, mode, dependence, out } => {
            let req = RunRequest {
                procedure,
                k,
                alpha,
                test,
                mode,
                dependence,
                brute_cap: brute_cap_from_env()?,
            };
            cmd_run(&input, req, out.as_deref())
        }
        Command::Simulate { config, seed, out } => cmd_simulate(&config, seed, out.as_deref()),
        Command::Validate { suites, seed, instances } => cmd_validate(&suites, SuiteOptions { seed, instances }),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("domino: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

//! `steiner`: exact Steiner tree solving on tree decompositions from the
//! command line.
//!
//! Exit codes: 0 success, 1 usage or input errors, 2 timeout, 3 infeasible.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};

use steiner_core::graph::{generate_instance, parse_plain_graph, parse_stp, write_stp, Instance};
use steiner_core::nice::{make_nice, validate_nice};
use steiner_core::report::{emit_report, Outcome, ReportFormat, RunReport};
use steiner_core::solver;
use steiner_core::td::{greedy_degree_decompose, validate};
use steiner_core::ReductionPolicy;

#[derive(Parser)]
#[command(name = "steiner", version, about = "Exact Steiner tree solver on tree decompositions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance with one algorithm
    Solve {
        /// Instance in STP format
        file: PathBuf,
        /// Algorithm: cdp (classic), rba (reduce always), rbc (reduce large tables)
        #[arg(long, default_value = "rbc")]
        algo: ReductionPolicy,
        /// Time budget in seconds
        #[arg(long, default_value_t = 3600)]
        timeout: u64,
        /// Output format: csv, json, or table
        #[arg(long, default_value = "table")]
        report: ReportFormat,
    },
    /// Solve with several algorithms on one shared decomposition
    Compare {
        /// Instance in STP format
        file: PathBuf,
        /// Comma-separated algorithms to run, in order
        #[arg(long, value_delimiter = ',', default_value = "cdp,rba,rbc")]
        algos: Vec<ReductionPolicy>,
        /// Time budget in seconds, per algorithm
        #[arg(long, default_value_t = 3600)]
        timeout: u64,
        /// Output format: csv, json, or table
        #[arg(long, default_value = "table")]
        report: ReportFormat,
    },
    /// Generate an STP instance from a plain edge list (DIMACS-like p/e lines)
    Gen {
        /// Plain graph file
        graph: PathBuf,
        /// Weight range as lo:hi, inclusive
        #[arg(long, default_value = "1:1000")]
        weights: String,
        /// Fraction of vertices to mark as terminals
        #[arg(long, default_value_t = 0.2)]
        terminals: f64,
        /// Seed for the deterministic generator
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Build and check the decompositions for an instance
    ValidateTd {
        /// Instance in STP format
        file: PathBuf,
        /// Write the raw decomposition to this file (one bag per line, then
        /// the tree edges)
        #[arg(long)]
        export: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version are not usage errors
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Solve {
            file,
            algo,
            timeout,
            report,
        } => {
            let (instance, name) = load_instance(&file)?;
            let run = solver::solve(&instance, &name, algo, budget(timeout));
            print!("{}", emit_report(std::slice::from_ref(&run), report));
            Ok(exit_for(&[run]))
        }
        Command::Compare {
            file,
            algos,
            timeout,
            report,
        } => {
            let (instance, name) = load_instance(&file)?;
            let runs = solver::compare(&instance, &name, &algos, budget(timeout));
            print!("{}", emit_report(&runs, report));
            Ok(exit_for(&runs))
        }
        Command::Gen {
            graph,
            weights,
            terminals,
            seed,
        } => {
            let text = read(&graph)?;
            let plain = parse_plain_graph(&text).map_err(|e| format!("{}: {e}", graph.display()))?;
            let range = parse_weight_range(&weights)?;
            let instance = generate_instance(&plain, terminals, range, seed)
                .map_err(|e| e.to_string())?;
            print!("{}", write_stp(&instance));
            Ok(ExitCode::SUCCESS)
        }
        Command::ValidateTd { file, export } => {
            let (instance, name) = load_instance(&file)?;
            let td = greedy_degree_decompose(&instance);
            let td_violations = validate(&td, &instance);
            let ntd = make_nice(&td, &instance);
            let nice_violations = validate_nice(&ntd, &instance, Some(td.width()));
            println!(
                "{name}: width {}, {} bags, {} nice nodes",
                td.width(),
                td.bags().len(),
                ntd.len()
            );
            for v in &td_violations {
                println!("decomposition violation: {v}");
            }
            for v in &nice_violations {
                println!("nice-decomposition violation: {v}");
            }
            if let Some(path) = export {
                std::fs::write(&path, td.export_text())
                    .map_err(|e| format!("{}: {e}", path.display()))?;
            }
            if td_violations.is_empty() && nice_violations.is_empty() {
                println!("ok");
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
    }
}

fn budget(timeout_secs: u64) -> Option<Duration> {
    Some(Duration::from_secs(timeout_secs))
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_instance(path: &Path) -> Result<(Instance, String), String> {
    let text = read(path)?;
    let instance = parse_stp(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    Ok((instance, name))
}

fn parse_weight_range(spec: &str) -> Result<(u64, u64), String> {
    let (lo, hi) = spec
        .split_once(':')
        .ok_or_else(|| format!("weight range `{spec}` must look like lo:hi"))?;
    let lo: u64 = lo.trim().parse().map_err(|_| format!("bad weight bound `{lo}`"))?;
    let hi: u64 = hi.trim().parse().map_err(|_| format!("bad weight bound `{hi}`"))?;
    Ok((lo, hi))
}

/// Worst outcome wins: timeouts over infeasibility over success.
fn exit_for(runs: &[RunReport]) -> ExitCode {
    if runs.iter().any(|r| r.outcome == Outcome::Timeout) {
        return ExitCode::from(2);
    }
    if runs.iter().any(|r| matches!(r.outcome, Outcome::Failed(_))) {
        return ExitCode::from(1);
    }
    if runs.iter().any(|r| r.outcome == Outcome::Infeasible) {
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}

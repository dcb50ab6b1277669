//! `uce`: batch front end for the equilibrium library.
//!
//! Exit codes: 0 ok, 2 bad input, 3 numerical failure, 4 candidate rejected.

mod commands;
mod spec;

use clap::{Parser, Subcommand};
use commands::{CliError, CliResult, Sink};
use spec::ExperimentSpec;
use std::path::PathBuf;
use std::process::ExitCode;
use uce_core::UceError;

#[derive(Parser)]
#[command(name = "uce", version, about = "Upper-censorship equilibria in search markets")]
struct Cli {
    /// Experiment file (JSON).
    #[arg(long, global = true)]
    spec: Option<PathBuf>,
    /// Output directory; results go to stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the simulation seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the LP grid size.
    #[arg(long, global = true)]
    grid: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Maximal equilibrium threshold and the cost-shape report.
    Solve,
    /// Check one threshold, optionally over a sweep of market sizes.
    Verify {
        /// Check from the registry: phi-secant, cost-limit, lp-oracle, price-function.
        #[arg(long)]
        method: Option<String>,
        /// Write (x, D, phi) rows to this CSV.
        #[arg(long)]
        emit_phi: Option<PathBuf>,
    },
    /// Best-response LP against a censorship conjecture.
    Oracle {
        /// Write the constraint matrix as sparse triplets.
        #[arg(long)]
        dump_lp: Option<PathBuf>,
    },
    /// Monte Carlo market.
    Simulate,
    /// Threshold across a family of cost distributions (CSV).
    Compstat,
    /// Consumer surplus and search length.
    Welfare,
    /// CSV panels: cost CDF with its tangent line, demand with its certificate.
    EmitPlot,
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(k) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::Core(UceError::Config(format!("threads: {e}"))))?;
    }
    let path = cli.spec.ok_or_else(|| CliError::Core(UceError::Config("--spec is required".into())))?;
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut spec = ExperimentSpec::parse(&text)?;
    if let Some(g) = cli.grid {
        spec.market.grid.lp = g;
    }
    let sink = Sink::new(cli.out.or_else(|| spec.out_dir.clone().map(PathBuf::from)))?;
    match cli.cmd {
        Cmd::Solve => commands::solve(&spec, &sink),
        Cmd::Verify { method, emit_phi } => commands::verify(&spec, method.as_deref(), emit_phi.as_ref(), &sink),
        Cmd::Oracle { dump_lp } => commands::oracle(&spec, dump_lp.as_ref(), &sink),
        Cmd::Simulate => commands::simulate(&spec, cli.seed, &sink),
        Cmd::Compstat => commands::compstat(&spec, &sink),
        Cmd::Welfare => commands::welfare(&spec, &sink),
        Cmd::EmitPlot => commands::emit_plot(&spec, &sink),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("uce: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

//! `curvesmith`: generate corpus curves, decide C² and bounded-second-derivative
//! reparametrizability, and construct the smoothing homeomorphism.

mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use curvesmith::decision::Mode;

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "curvesmith", version, about)]
struct Cli {
    /// JSON config file; missing fields take their defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Random seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a corpus curve to CSV and write its metadata.
    Corpus {
        #[command(flatten)]
        curve: CurveArg,
        /// Output directory for curve.csv and curve.json.
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Number of sampling steps.
        #[arg(long, default_value_t = 1024)]
        samples: usize,
    },
    /// Decide reparametrizability and emit the analysis report.
    Analyze {
        #[command(flatten)]
        curve: CurveArg,
        #[command(flatten)]
        analysis: AnalysisArgs,
        /// Write the report here instead of stdout.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Write the pooled partition partial sums as CSV.
        #[arg(long, value_name = "PATH")]
        emit_partial_sums: Option<PathBuf>,
    },
    /// Construct h, export it and verify the smoothness of f∘h.
    Reparametrize {
        #[command(flatten)]
        curve: CurveArg,
        #[command(flatten)]
        analysis: AnalysisArgs,
        /// Cell bound K of the certified partitions.
        #[arg(long = "K", default_value_t = 1.0)]
        k: f64,
        /// Construct even when the verdict is not reparametrizable.
        #[arg(long)]
        force: bool,
        /// Output directory for h.csv, manifest.json and verify.json.
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Number of sampling steps of h.csv.
        #[arg(long, default_value_t = 1024)]
        samples: usize,
        /// Coarsest grid of the second-difference check.
        #[arg(long, default_value_t = 1000)]
        grid: usize,
        /// Bound on ‖(f∘h)′‖ at the boundary points.
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
}

#[derive(Args, Debug)]
struct CurveArg {
    /// Curve descriptor: inline JSON, a descriptor file, or curve.json from `corpus`.
    curve: String,
}

#[derive(Args, Debug, Clone, Copy)]
struct AnalysisArgs {
    /// Smoothness class: c2 or d2inf.
    #[arg(long, default_value = "c2")]
    mode: Mode,
    /// Threshold δ of the greedy partitions.
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let cfg = commands::load_config(cli.config.as_deref(), cli.seed)?;
    match cli.command {
        Command::Corpus { curve, out, samples } => commands::corpus(&curve.curve, &out, samples, &cfg),
        Command::Analyze { curve, analysis, out, emit_partial_sums } => commands::analyze(
            &curve.curve,
            analysis.mode,
            analysis.delta,
            out.as_deref(),
            emit_partial_sums.as_deref(),
            &cfg,
        ),
        Command::Reparametrize { curve, analysis, k, force, out, samples, grid, tol } => {
            let opts =
                commands::ReparamOptions { mode: analysis.mode, delta: analysis.delta, k, force, samples, grid, tol };
            commands::reparametrize(&curve.curve, &opts, &out, &cfg)
        }
    }
}

fn main() -> ExitCode {
    // usage errors exit with 1 so that 2 stays reserved for inconclusive verdicts
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

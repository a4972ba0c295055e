#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mf_cli::{lower_bound_demo, replay, run, CliError, LowerBoundParams, Written};

#[derive(Parser)]
#[command(name = "mfourier", version, about = "Fourier thresholding experiments on monotone functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write its CSV and provenance files.
    Run {
        config: PathBuf,
        /// Override the config's master seed (recorded in the provenance).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Re-run the experiment recorded in a provenance file.
    Replay {
        provenance: PathBuf,
        /// Write artifacts here instead of the recorded output directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Build and verify a middle-layer family, printing a JSON report.
    LowerBoundDemo {
        /// Support size; defaults to floor(2 log2 n).
        #[arg(long = "s")]
        s: Option<usize>,
        /// L1-influence budget.
        #[arg(long = "k")]
        k: f64,
        /// Optional L2-influence budget.
        #[arg(long = "b")]
        b: Option<f64>,
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 256)]
        max_words: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
}

fn report(w: &Written) {
    emit(&format!("{}\n{}", w.csv.display(), w.provenance.display()));
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Run { config, seed } => report(&run(&config, seed)?),
        Command::Replay { provenance, output } => report(&replay(&provenance, output.as_deref())?),
        Command::LowerBoundDemo {
            s,
            k,
            b,
            sigma,
            n,
            max_words,
            seed,
        } => {
            let params = LowerBoundParams {
                s,
                budget: k,
                l2_budget: b,
                a1: None,
                sigma,
                n,
                max_words,
                dim: None,
            };
            if !(k > 0.0) || !(sigma > 0.0) || n == 0 || max_words < 2 {
                return Err(CliError::Usage("need --k > 0, --sigma > 0, --n >= 1, --max-words >= 2".into()));
            }
            let demo = lower_bound_demo(&params, seed)?;
            emit(&serde_json::to_string_pretty(&demo).expect("serializable report"));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

//! Command-line front end for circuit plans.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qlight::plan::{execute_plan, export_outputs, parse_plan, CircuitPlan};
use qlight::{oracle, Error};

#[derive(Parser)]
#[command(name = "qlight", version, about = "Heralded photon-level state engineering on truncated Fock spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a plan and write the report, metrics and artifacts.
    Run {
        plan: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the plan seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the plan cutoff.
        #[arg(long)]
        cutoff: Option<usize>,
    },
    /// Parse and validate a plan without running it.
    Validate { plan: PathBuf },
    /// Print the reference values of a named oracle.
    Oracle {
        /// One of the oracle names; `list` prints them.
        name: String,
    },
}

const EXIT_VALIDATION: u8 = 2;
const EXIT_HERALD: u8 = 3;
const EXIT_IO: u8 = 4;

fn exit_code(e: &Error) -> u8 {
    if e.is_herald_impossible() {
        return EXIT_HERALD;
    }
    match e {
        Error::Io(_) => EXIT_IO,
        Error::Stage { source, .. } => exit_code(source),
        _ => EXIT_VALIDATION,
    }
}

fn load(path: &Path) -> Result<CircuitPlan, ExitCode> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(EXIT_IO)
    })?;
    parse_plan(&text).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(EXIT_VALIDATION)
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { plan } => match load(&plan) {
            Ok(p) => {
                println!("ok: {} stage(s), {} measurement(s)", p.stages.len(), p.measurements.len());
                ExitCode::SUCCESS
            }
            Err(code) => code,
        },
        Command::Run { plan, out, seed, cutoff } => {
            let mut p = match load(&plan) {
                Ok(p) => p,
                Err(code) => return code,
            };
            if let Some(s) = seed {
                p.seed = s;
            }
            if let Some(c) = cutoff {
                if c == 0 {
                    eprintln!("error: --cutoff must be positive");
                    return ExitCode::from(EXIT_VALIDATION);
                }
                p.cutoff = c;
            }
            let report = match execute_plan(&p) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(exit_code(&e));
                }
            };
            match export_outputs(&report, &out) {
                Ok(files) => {
                    for f in files {
                        println!("{}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: cannot write {}: {e}", out.display());
                    ExitCode::from(EXIT_IO)
                }
            }
        }
        Command::Oracle { name } => {
            if name == "list" {
                for n in oracle::NAMES {
                    println!("{n}");
                }
                return ExitCode::SUCCESS;
            }
            match oracle::run(&name) {
                Ok(values) => {
                    for (k, v) in values {
                        println!("{name}.{k} = {v:e}");
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_VALIDATION)
                }
            }
        }
    }
}

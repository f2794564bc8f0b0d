use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gsp::checker::{check_program, ElabProgram};
use gsp::diag::{to_json, Diagnostic};
use gsp::harness::{fuzz, run_corpus, DEFAULT_BUDGET};
use gsp::syntax::parse;
use gsp::vm::{self, Failure, Options};

#[derive(Parser)]
#[command(name = "gsp", version, about = "Checker, VM and soundness fuzzer for a gradually-sound Python core")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Type-check a program.
    Check {
        file: PathBuf,
        /// Print diagnostics as a JSON array.
        #[arg(long)]
        json: bool,
    },
    /// Check, compile and run a program, printing each top-level value.
    Run {
        file: PathBuf,
        /// Keep every call on the checked entry.
        #[arg(long)]
        no_opt: bool,
        /// Write the execution counters to this file as JSON.
        #[arg(long, value_name = "OUT")]
        metrics: Option<PathBuf>,
        /// Instruction budget.
        #[arg(long, value_name = "N")]
        budget: Option<u64>,
    },
    /// Print the bytecode of a program.
    DumpBc {
        file: PathBuf,
        #[arg(long)]
        no_opt: bool,
    },
    /// Generate and judge random programs.
    Fuzz {
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.5, value_parser = parse_bias)]
        dyn_bias: f64,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Run every `.gsp` file of a directory against its `# expect:` header.
    Corpus { dir: PathBuf },
}

fn parse_bias(s: &str) -> Result<f64, String> {
    let p: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err("must be between 0 and 1".into())
    }
}

fn print_diags(file: &std::path::Path, diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("{}:{d}", file.display());
    }
}

/// Reads, parses and checks a file; reports diagnostics itself.
fn load(file: &std::path::Path, json: bool) -> Result<ElabProgram, ExitCode> {
    let src = std::fs::read_to_string(file).map_err(|e| {
        eprintln!("{}: {e}", file.display());
        ExitCode::from(1)
    })?;
    let checked = parse(&src).and_then(|p| check_program(&p));
    checked.map_err(|diags| {
        if json {
            println!("{}", to_json(&diags));
        } else {
            print_diags(file, &diags);
        }
        ExitCode::from(1)
    })
}

fn run(cli: Cli) -> Result<ExitCode, ExitCode> {
    match cli.cmd {
        Cmd::Check { file, json } => {
            load(&file, json)?;
            if json {
                println!("[]");
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Run {
            file,
            no_opt,
            metrics,
            budget,
        } => {
            let p = load(&file, false)?;
            let out = vm::run(
                &p,
                &Options {
                    budget,
                    debug_checks: false,
                    optimize: !no_opt,
                },
            );
            for line in &out.output {
                println!("{line}");
            }
            if let Some(path) = metrics {
                let json = serde_json::to_string_pretty(&out.metrics).expect("metrics serialize");
                std::fs::write(&path, json + "\n").map_err(|e| {
                    eprintln!("{}: {e}", path.display());
                    ExitCode::from(1)
                })?;
            }
            match out.result {
                Ok(()) => Ok(ExitCode::SUCCESS),
                Err(Failure::Runtime(e)) => {
                    eprintln!("{e}");
                    Err(ExitCode::from(2))
                }
                Err(Failure::Timeout) => {
                    eprintln!("Timeout: instruction budget or nesting limit exceeded");
                    Err(ExitCode::from(2))
                }
                Err(Failure::Internal(msg)) => {
                    eprintln!("InternalError: {msg}");
                    Err(ExitCode::from(2))
                }
            }
        }
        Cmd::DumpBc { file, no_opt } => {
            let p = load(&file, false)?;
            print!("{}", vm::build(&p, !no_opt));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Fuzz {
            count,
            seed,
            dyn_bias,
            budget,
        } => {
            let report = fuzz(count, seed, dyn_bias, budget);
            print!("{report}");
            if report.violations.is_empty() {
                Ok(ExitCode::SUCCESS)
            } else {
                Err(ExitCode::from(1))
            }
        }
        Cmd::Corpus { dir } => {
            let report = run_corpus(&dir).map_err(|e| {
                eprintln!("{}: {e}", dir.display());
                ExitCode::from(1)
            })?;
            print!("{report}");
            Ok(if report.ok() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn main() -> ExitCode {
    run(Cli::parse()).unwrap_or_else(|code| code)
}

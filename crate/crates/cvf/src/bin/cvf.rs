//! Command-line front end: verify, run, explore, erase, crosscheck,
//! selftest.
//!
//! Exit codes: 0 on a passing verdict, 1 on a failing verdict, 2 on parse
//! errors, 3 on internal errors.

use clap::{Parser, Subcommand, ValueEnum};
use cvf::explore::{explore_with, ExploreConfig, ExploreVerdict};
use cvf::interp::{run_leftmost, Configuration};
use cvf::oracle::soundness_crosscheck;
use cvf::syntax::{command_to_string, erase, parse_program, Program};
use cvf::verify::{verify_program_with, VerifyConfig};
use std::io::Read;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "cvf",
    about = "Verifier and interpreter for .cvf programs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the annotated program against the proof rules.
    Verify {
        /// Input file (`-` for standard input).
        input: String,
        /// Treat leftover chunks at the end as failures.
        #[arg(long)]
        strict_leaks: bool,
        /// Output format.
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Execute one deterministic (leftmost) schedule of the erasure.
    Run {
        input: String,
        /// Maximum number of steps.
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
        /// Print the trace, one line per step.
        #[arg(long)]
        trace: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Explore every interleaving of the erasure up to a depth bound.
    Explore {
        input: String,
        /// Depth bound in steps.
        #[arg(long, default_value_t = 64)]
        depth: usize,
        /// Worker threads (output is deterministic regardless).
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Print the witness trace on a not-okay verdict.
        #[arg(long)]
        trace: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Print the erased program.
    Erase { input: String },
    /// Run the verifier and the explorer and compare verdicts.
    Crosscheck {
        input: String,
        #[arg(long, default_value_t = 64)]
        depth: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run the randomized property suites.
    Selftest {
        /// RNG seed.
        #[arg(long, default_value_t = 20_250_809)]
        seed: u64,
    },
}

fn read_input(path: &str) -> Result<String, String> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| format!("cannot read standard input: {e}"))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| format!("cannot read `{path}`: {e}"))
    }
}

fn load(path: &str) -> Result<Program, (u8, String)> {
    let text = read_input(path).map_err(|e| (3u8, e))?;
    parse_program(&text).map_err(|e| (2u8, format!("parse error: {e}")))
}

fn main() -> ExitCode {
    // die quietly when the downstream end of a pipe closes
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(code)) => ExitCode::from(code),
        Ok(Err((code, msg))) => {
            eprintln!("cvf: {msg}");
            ExitCode::from(code)
        }
        Err(_) => {
            eprintln!("cvf: internal error");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<u8, (u8, String)> {
    match cli.command {
        Cmd::Verify {
            input,
            strict_leaks,
            format,
        } => {
            let program = load(&input)?;
            let cfg = VerifyConfig {
                strict_leaks,
                ..Default::default()
            };
            let report = verify_program_with(&program, &cfg);
            match format {
                Format::Text => print!("{report}"),
                Format::Structured => println!(
                    "{}",
                    serde_json::to_string_pretty(&report.to_json()).expect("serialize")
                ),
            }
            Ok(if report.is_verified() { 0 } else { 1 })
        }
        Cmd::Run {
            input,
            max_steps,
            trace,
            format,
        } => {
            let program = load(&input)?;
            let erased = erase(&program.main);
            let (final_cfg, steps) = run_leftmost(&Configuration::initial(erased), max_steps);
            if trace {
                for line in &steps {
                    println!("{line}");
                }
            }
            match format {
                Format::Text => println!("{final_cfg}"),
                Format::Structured => println!(
                    "{}",
                    serde_json::json!({
                        "heap": final_cfg.heap.to_string(),
                        "command": command_to_string(&final_cfg.cmd),
                        "finished": final_cfg.finished(),
                        "steps": steps.len(),
                    })
                ),
            }
            Ok(if final_cfg.finished() { 0 } else { 1 })
        }
        Cmd::Explore {
            input,
            depth,
            jobs,
            trace,
            format,
        } => {
            let program = load(&input)?;
            let erased = erase(&program.main);
            let report = explore_with(
                &Configuration::initial(erased),
                &ExploreConfig {
                    max_steps: depth,
                    jobs,
                    ..Default::default()
                },
            );
            match format {
                Format::Text => {
                    print!("{report}");
                    if trace {
                        if let ExploreVerdict::NotOkay { trace } = &report.verdict {
                            for t in trace {
                                println!("{}", t.line());
                            }
                        }
                    }
                }
                Format::Structured => println!(
                    "{}",
                    serde_json::to_string_pretty(&report.to_json()).expect("serialize")
                ),
            }
            Ok(if report.is_safe() { 0 } else { 1 })
        }
        Cmd::Erase { input } => {
            let program = load(&input)?;
            let erased = erase(&program.main);
            println!("{}", command_to_string(&erased));
            Ok(0)
        }
        Cmd::Crosscheck {
            input,
            depth,
            format,
        } => {
            let program = load(&input)?;
            let report = soundness_crosscheck(&program, depth);
            match format {
                Format::Text => print!("{report}"),
                Format::Structured => println!(
                    "{}",
                    serde_json::to_string_pretty(&report.to_json()).expect("serialize")
                ),
            }
            Ok(if report.fatal { 1 } else { 0 })
        }
        Cmd::Selftest { seed } => {
            let reports = cvf::selftest::run_all(seed);
            let mut ok = true;
            for r in &reports {
                println!("{r}");
                ok &= r.passed();
            }
            Ok(if ok { 0 } else { 1 })
        }
    }
}

use clap::{Parser, Subcommand};
use memwave::config::ExperimentConfig;
use memwave::experiment::{catalog, run_builtin, run_config, RunContext};
use std::path::PathBuf;
use std::process::ExitCode;

/// Reproducible experiment runner for the memory-wave solver.
#[derive(Parser)]
#[command(name = "memwave", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a config file.
    Run {
        /// Path to the experiment config.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config's [output] dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Exit nonzero if any recorded assertion failed.
        #[arg(long)]
        check: bool,
        /// Seed override for randomized batches.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for mode-parallel solves.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// List the built-in named experiments.
    List,
    /// Run built-in experiments (all, or one by name) and fail on any
    /// unmet assertion.
    Check {
        /// Experiment name; omit to run the whole catalog.
        name: Option<String>,
        /// Output directory for reports.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed for randomized batches.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads for mode-parallel solves.
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn configure_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        // Ignore failure: the global pool may already exist.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            out,
            check,
            seed,
            threads,
        } => {
            configure_threads(threads);
            let parsed = match ExperimentConfig::load(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            match run_config(&parsed, seed, out.as_deref()) {
                Ok(report) => {
                    for line in report.render_lines() {
                        println!("{line}");
                    }
                    println!(
                        "{}: {}",
                        report.name,
                        if report.passed() { "PASS" } else { "FAIL" }
                    );
                    if check && !report.passed() {
                        ExitCode::FAILURE
                    } else {
                        ExitCode::SUCCESS
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::List => {
            for e in catalog() {
                println!("{:<26} {}", e.name, e.description);
            }
            ExitCode::SUCCESS
        }
        Command::Check {
            name,
            out,
            seed,
            threads,
        } => {
            configure_threads(threads);
            let ctx = RunContext { seed, out_dir: out };
            let names: Vec<&str> = match &name {
                Some(n) => vec![n.as_str()],
                None => catalog().iter().map(|e| e.name).collect(),
            };
            let mut all_ok = true;
            for n in names {
                match run_builtin(n, &ctx) {
                    Ok(report) => {
                        for line in report.render_lines() {
                            println!("{line}");
                        }
                        if !report.passed() {
                            all_ok = false;
                        }
                    }
                    Err(e) => {
                        eprintln!("error running {n}: {e}");
                        all_ok = false;
                    }
                }
            }
            if all_ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

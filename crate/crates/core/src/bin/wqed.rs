use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wqed::scenario::{self, Axis, RunOptions};
use wqed::Error;

/// Waveguide QED with atomic mirrors: spectra and photon statistics.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// Output directory (default: $WQED_OUT, else ./wqed-out)
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Recorded in the manifest; every algorithm is deterministic
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or a built-in scenario by name
    Run { scenario: String },
    /// Run a scenario once per value of one parameter
    Sweep {
        scenario: String,
        #[arg(long)]
        axis: String,
        /// Comma-separated values
        #[arg(long, allow_hyphen_values = true)]
        values: String,
    },
    /// Print the built-in scenarios
    ListScenarios,
}

fn exit_for(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_config() { 1 } else { 2 })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let opts = RunOptions {
        out_dir: RunOptions::resolve_out_dir(cli.out_dir),
        seed: cli.seed,
    };
    let manifest = match cli.command {
        Command::ListScenarios => {
            for (name, description) in scenario::list_scenarios() {
                println!("{name:<24} {description}");
            }
            return ExitCode::SUCCESS;
        }
        Command::Run { scenario } => scenario::run(&scenario, &opts),
        Command::Sweep { scenario, axis, values } => axis
            .parse::<Axis>()
            .and_then(|a| Ok((a, scenario::parse_values(&values)?)))
            .and_then(|(a, v)| scenario::sweep(&scenario, a, &v, &opts)),
    };
    match manifest {
        Err(e) => exit_for(&e),
        Ok(m) => {
            for f in &m.failures {
                eprintln!("failed: {}: {}", f.scenario, f.error);
            }
            if m.oracle_failures > 0 {
                eprintln!("{} oracle check(s) failed", m.oracle_failures);
            }
            println!("wrote {} file(s) to {}", m.files.len(), opts.out_dir.display());
            if m.ok() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qrelay_core::bench::{exit_code, run_scenario, BackendChoice, BenchConfig, Scenario};
use qrelay_core::Error;

#[derive(Parser)]
#[command(name = "qrelay-bench", about = "Run quantum-relay simulation scenarios and write CSV, SVG and summary files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario: entanglement, bb84-sweep, detuning, oscillation,
    /// tomography, landscape or full-report.
    Run {
        scenario: String,
        /// TOML configuration file; defaults are used for anything missing.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// analytic, montecarlo or both.
        #[arg(long)]
        backend: Option<String>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the default configuration as TOML.
    DefaultConfig,
}

fn configure_threads() -> Result<(), Error> {
    if let Ok(v) = std::env::var("QRELAY_THREADS") {
        let n: usize = v.parse().map_err(|_| Error::Config(format!("QRELAY_THREADS='{v}' is not a number")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::DefaultConfig => {
            print!("{}", BenchConfig::default().to_toml_string()?);
            Ok(())
        }
        Command::Run { scenario, config, seed, backend, out } => {
            configure_threads()?;
            let scenario = Scenario::parse(&scenario)?;
            let mut cfg = match config {
                Some(p) => BenchConfig::load(&p)?,
                None => BenchConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(b) = backend {
                cfg.backend = BackendChoice::parse(&b)?;
            }
            if let Some(o) = out {
                cfg.output_dir = o;
            }
            let summary = run_scenario(scenario, &cfg)?;
            for line in &summary.lines {
                println!("{line}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}

//! `qkonc`: config-driven experiment runner emitting CSV and JSON artifacts.

mod config;
mod error;
mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use sha2::{Digest, Sha256};

use config::{Experiment, ExperimentConfig, DEFAULT_OUTPUT};
use error::CliError;
use output::Manifest;

#[derive(Debug, Parser)]
#[command(name = "qkonc", version, about = "Quantum kernel concentration experiments")]
struct Args {
    /// Experiment to run.
    #[arg(value_enum)]
    experiment: Experiment,
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "QKONC_THREADS")]
    threads: Option<usize>,
}

fn run(args: Args) -> Result<PathBuf, CliError> {
    let start = Instant::now();
    let text =
        std::fs::read_to_string(&args.config).map_err(|e| CliError::Io(format!("{}: {e}", args.config.display())))?;
    let mut cfg = ExperimentConfig::parse(&text)?;
    if let Some(seed) = args.seed {
        cfg.seed = Some(seed);
    }
    if let Some(base) = args.config.parent() {
        cfg.resolve_paths(base);
    }
    cfg.validate(args.experiment)?;
    cfg.experiment = Some(args.experiment);

    if let Some(t) = args.threads {
        if t == 0 {
            return Err(CliError::Validation {
                field: "threads".into(),
                message: "must be at least 1".into(),
            });
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }

    let out = args
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT));
    let outcome = experiments::run(args.experiment, &cfg)?;

    std::fs::create_dir_all(&out)?;
    for a in &outcome.artifacts {
        a.write(&out)?;
    }
    let config = serde_json::to_value(&cfg).expect("config serializes");
    let canonical = serde_json::to_string(&config).expect("config serializes");
    let manifest = Manifest {
        experiment: args.experiment.name(),
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed(),
        config_sha256: Sha256::digest(canonical.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect(),
        config,
        files: outcome.artifacts.iter().map(|a| a.name().to_string()).collect(),
        point_seeds: outcome.point_seeds,
        threads: rayon::current_num_threads(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(out.join("manifest.json"), json + "\n")?;
    Ok(out)
}

fn fail(err: CliError) -> ExitCode {
    eprintln!("{}", err.to_json());
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(CliError::Usage(e.kind().to_string() + ": " + &e.render().to_string())),
    };
    match run(args) {
        Ok(out) => {
            println!("{}", out.display());
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}

//! Benchmark CLI. Subcommands:
//!
//! * `run <spec.toml>`: execute the experiment grid, write `results.csv`,
//!   `results.json`, and `audit.json` (plus `errors.json` when rows failed).
//! * `validate <spec.toml>`: parse and check a manifest without running it.
//! * `de-bounds <cov.json> --gamma <targets.json>`: standalone bound
//!   computation from covariances, no channel realizations involved.
//!
//! Exit codes: 0 success, 2 when any row failed (or a standalone solve was
//! infeasible), 1 on manifest or input errors. `PRECODE_LOG` sets the log
//! filter (`error` by default).

use clap::{Parser, Subcommand};
use precode::bench::{
    audit_violations, bounds_to_file, emit_csv, emit_json, load_covariance, load_targets,
    run_experiment, write_bounds, ExperimentSpec,
};
use precode::de::{de_bounds, DeConfig};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "precode", version, about = "CJT precoding benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment manifest and write result tables.
    Run {
        /// Experiment manifest (TOML).
        spec: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Output directory; overrides [output].dir in the manifest.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Added to every seed in the manifest.
        #[arg(long, default_value_t = 0)]
        seed_offset: u64,
    },
    /// Check a manifest without running it.
    Validate {
        /// Experiment manifest (TOML).
        spec: PathBuf,
    },
    /// Compute deterministic-equivalent interference bounds from covariances.
    DeBounds {
        /// Covariance file (JSON).
        cov: PathBuf,
        /// Per-pair SINR targets (JSON).
        #[arg(long)]
        gamma: PathBuf,
        /// Noise variance.
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PRECODE_LOG", "error"))
        .init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run { spec, jobs, out, seed_offset } => cmd_run(&spec, jobs, out, seed_offset),
        Command::Validate { spec } => cmd_validate(&spec),
        Command::DeBounds { cov, gamma, sigma2, out } => {
            cmd_de_bounds(&cov, &gamma, sigma2, out.as_deref())
        }
    }
}

fn cmd_run(
    spec_path: &Path,
    jobs: Option<usize>,
    out: Option<PathBuf>,
    seed_offset: u64,
) -> ExitCode {
    let spec = match ExperimentSpec::from_path(spec_path) {
        Ok(s) => s,
        Err(e) => return input_error(e),
    };
    let dir = out
        .or_else(|| spec.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    if let Err(e) = std::fs::create_dir_all(&dir) {
        eprintln!("error: cannot create {}: {e}", dir.display());
        return ExitCode::from(1);
    }
    let outcome = match run_experiment(&spec, jobs, seed_offset) {
        Ok(o) => o,
        Err(e) => return input_error(e),
    };

    let write = || -> Result<(), precode::bench::BenchError> {
        emit_csv(&outcome.rows, &dir.join("results.csv"))?;
        emit_json(&outcome.rows, &dir.join("results.json"))?;
        write_json(&dir.join("audit.json"), &outcome.audit)?;
        if !outcome.errors.is_empty() {
            write_json(&dir.join("errors.json"), &outcome.errors)?;
        }
        Ok(())
    };
    if let Err(e) = write() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }

    let violations = audit_violations(&outcome.audit);
    for v in &violations {
        eprintln!("audit violation: {v}");
    }
    for e in &outcome.errors {
        eprintln!(
            "row failed: {} n_tx={} seed={} alpha={} beta={}: {}",
            e.scheme, e.n_tx, e.seed, e.alpha, e.beta, e.message
        );
    }
    println!(
        "{} rows, {} failures, {} audit records (noise: {}) -> {}",
        outcome.rows.len(),
        outcome.errors.len(),
        outcome.audit.len(),
        spec.run.noise_mode.name(),
        dir.display()
    );
    if outcome.errors.is_empty() && violations.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn cmd_validate(spec_path: &Path) -> ExitCode {
    let spec = match ExperimentSpec::from_path(spec_path) {
        Ok(s) => s,
        Err(e) => return input_error(e),
    };
    let cells = spec.channel.n_tx.len()
        * spec.run.seeds.len()
        * spec.run.alpha.len()
        * spec.run.beta.len()
        * spec.schemes().len();
    println!(
        "ok: {} schemes x {} n_tx x {} seeds x {} alpha x {} beta = {} rows (noise: {})",
        spec.schemes().len(),
        spec.channel.n_tx.len(),
        spec.run.seeds.len(),
        spec.run.alpha.len(),
        spec.run.beta.len(),
        cells,
        spec.run.noise_mode.name()
    );
    ExitCode::SUCCESS
}

fn cmd_de_bounds(cov: &Path, gamma: &Path, sigma2: f64, out: Option<&Path>) -> ExitCode {
    if !(sigma2.is_finite() && sigma2 > 0.0) {
        eprintln!("error: sigma2 must be positive");
        return ExitCode::from(1);
    }
    let (topo, cov) = match load_covariance(cov) {
        Ok(v) => v,
        Err(e) => return input_error(e),
    };
    let targets = match load_targets(gamma, &topo) {
        Ok(v) => v,
        Err(e) => return input_error(e),
    };
    let sol = match de_bounds(&cov, &topo, &targets, sigma2, &DeConfig::default()) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let file = bounds_to_file(&topo, &sol, sigma2);
    match out {
        Some(path) => {
            if let Err(e) = write_bounds(&file, path) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        }
        None => println!("{}", serde_json::to_string_pretty(&file).expect("bounds serialize")),
    }
    ExitCode::SUCCESS
}

fn input_error(e: precode::bench::BenchError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(1)
}

fn write_json<T: serde::Serialize>(
    path: &Path,
    value: &T,
) -> Result<(), precode::bench::BenchError> {
    let text = serde_json::to_string_pretty(value).expect("serialize");
    std::fs::write(path, text.as_bytes()).map_err(|e| precode::bench::BenchError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use beamsim::output::{emit_csv, emit_spectrum_csv, spectrum_curve};
use beamsim::runner::summarize;
use beamsim::{sweep_snapshots, sweep_snr, validate, ScenarioConfig, SinrRecord};
use clap::{Args, Parser, Subcommand};

/// Monte Carlo SINR experiments for matrix-free maximum-entropy beamforming.
#[derive(Parser)]
#[command(name = "beamsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Output SINR versus input SNR at a fixed snapshot count.
    SweepSnr(RunArgs),
    /// Output SINR versus snapshot count at a fixed SNR.
    SweepSnapshots(RunArgs),
    /// Maximum entropy spectrum of one run on a 1 degree grid.
    Spectrum(RunArgs),
    /// Check the matrix-free solvers against the dense reference.
    Validate {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON scenario file; omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Overrides `base_seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Use the fixed-step recursions instead of conjugate gradient.
    #[arg(long)]
    paper_faithful: bool,
}

impl RunArgs {
    fn load(&self) -> Result<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(path) => ScenarioConfig::load(path)?,
            None => ScenarioConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.base_seed = seed;
        }
        cfg.paper_faithful |= self.paper_faithful;
        for w in cfg.warnings() {
            eprintln!("warning: {w}");
        }
        Ok(cfg)
    }
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(val) = std::env::var("BEAMSIM_THREADS") {
        let n: usize = val
            .parse()
            .with_context(|| format!("BEAMSIM_THREADS={val} is not a thread count"))?;
        builder = builder.num_threads(n);
    }
    Ok(builder.build()?)
}

fn print_summary(records: &[SinrRecord]) {
    println!(
        "{:<14} {:>8} {:>6} {:>10} {:>10} {:>7}",
        "method", "snr_db", "K", "mean_db", "median_db", "failed"
    );
    for p in summarize(records) {
        println!(
            "{:<14} {:>8.2} {:>6} {:>10.3} {:>10.3} {:>7}",
            p.method, p.snr_db, p.snapshots, p.mean_db, p.median_db, p.failed
        );
    }
}

fn write_sweep(records: &[SinrRecord], out: &Path) -> Result<()> {
    emit_csv(records, out)?;
    print_summary(records);
    eprintln!("wrote {} records to {}", records.len(), out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    let pool = thread_pool()?;
    match cli.command {
        Command::SweepSnr(args) => {
            let cfg = args.load()?;
            let records = pool.install(|| sweep_snr(&cfg))?;
            write_sweep(&records, &args.out)?;
        }
        Command::SweepSnapshots(args) => {
            let cfg = args.load()?;
            let records = pool.install(|| sweep_snapshots(&cfg))?;
            write_sweep(&records, &args.out)?;
        }
        Command::Spectrum(args) => {
            let cfg = args.load()?;
            let curve = spectrum_curve(&cfg)?;
            emit_spectrum_csv(&curve, &args.out)?;
            eprintln!(
                "wrote {} spectrum points to {}",
                curve.len(),
                args.out.display()
            );
        }
        Command::Validate { seed } => {
            let checks = validate::run_all(seed)?;
            for c in &checks {
                println!("{c}");
            }
            return Ok(checks.iter().all(|c| c.passed));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

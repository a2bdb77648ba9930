use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use clap::Parser;
use graysol_cli::config::{ExperimentConfig, ExperimentKind};
use graysol_cli::pipeline;

/// Packet and soliton simulations on a ring.
#[derive(Debug, Parser)]
#[command(name = "graysol", version)]
struct Args {
    /// JSON experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Experiment preset, or override of the configured kind.
    #[arg(long, value_enum)]
    experiment: Option<ExperimentKind>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Time step (default: largest stable step).
    #[arg(long)]
    dt: Option<f64>,
    /// Grid points, a power of two (default: spacing at most 0.2).
    #[arg(long)]
    grid: Option<usize>,
    /// Validate and print snapped wavenumbers and predictions only.
    #[arg(long)]
    dry_run: bool,
}

fn main() -> anyhow::Result<()> {
    let args = Args::parse();
    let mut cfg = match (&args.config, args.experiment) {
        (Some(path), _) => {
            ExperimentConfig::load(path).with_context(|| format!("reading {}", path.display()))?
        }
        (None, Some(kind)) => ExperimentConfig::preset(kind),
        (None, None) => ExperimentConfig::default(),
    };
    if let Some(kind) = args.experiment {
        cfg.experiment = kind;
    }
    if let Some(out) = args.out {
        cfg.out_dir = out;
    }
    if args.dt.is_some() {
        cfg.dt = args.dt;
    }
    if args.grid.is_some() {
        cfg.geometry.n_points = args.grid;
    }
    cfg.validate()?;
    if args.dry_run {
        let entries = pipeline::dry_run(&cfg)?;
        let mut out = std::io::stdout().lock();
        return match writeln!(out, "{}", serde_json::to_string_pretty(&entries)?) {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            r => Ok(r?),
        };
    }
    let (records, failures) = pipeline::run(&cfg)?;
    eprintln!(
        "{records} records, {failures} failures, written to {}",
        cfg.out_dir.display()
    );
    if failures > 0 {
        std::process::exit(2);
    }
    Ok(())
}

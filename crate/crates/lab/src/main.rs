use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use renorm_lab::{run, Command, LabError, RunConfig};

/// Renormalization experiments on multimodal interval maps.
#[derive(Parser, Debug)]
#[command(name = "renorm", version)]
struct Cli {
    /// analyze, nest, cascade, tune, delta, alpha, tower, contraction, julia, external or combinatorics
    #[arg(value_parser = |s: &str| s.parse::<Command>().map_err(|e| e.to_string()))]
    command: Command,
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Family parameters, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    b: Option<Vec<f64>>,
    /// Canonical combinatorics strings, shorthand such as "M2^5", or @file.
    #[arg(long, allow_hyphen_values = true)]
    word: Option<String>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    max_period: Option<usize>,
    /// 53 (f64) or 106 (double-double).
    #[arg(long)]
    precision_bits: Option<u32>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Output directory for reports.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn config(cli: &Cli) -> Result<RunConfig, LabError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(b) = &cli.b {
        cfg.b = b.clone();
    }
    if cli.word.is_some() {
        cfg.word = cli.word.clone();
    }
    if let Some(d) = cli.depth {
        cfg.depth = d;
    }
    if cli.max_period.is_some() {
        cfg.max_period = cli.max_period;
    }
    if let Some(p) = cli.precision_bits {
        cfg.precision_bits = p;
    }
    if let Some(n) = cli.n_max {
        cfg.n_max = n;
    }
    if cli.cache_dir.is_some() {
        cfg.cache_dir = cli.cache_dir.clone();
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let status = run(cli.command, &cfg);
    if let Some(e) = &status.error {
        eprintln!("error: {e}");
    }
    if let Some(p) = &status.report {
        println!("{}", p.display());
    }
    ExitCode::from(status.exit_code as u8)
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use robsub::harness::{run_experiment, RunConfig};

/// Run a robust/risk-averse submodular optimization experiment from a JSON config.
#[derive(Parser, Debug)]
#[command(name = "robsub", version)]
struct Cli {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (defaults to the config's `out`, then `./out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
    /// Lift enumeration caps. Exact oracles may then run for a very long time.
    #[arg(long)]
    cap_override: bool,
    /// Write 0 in every wall-time column.
    #[arg(long)]
    no_timing: bool,
}

fn run(cli: Cli) -> robsub::Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| robsub::Error::Internal(e.to_string()))?;
    }
    let mut cfg = RunConfig::load(&cli.config)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg.cap_override |= cli.cap_override;
    if cli.no_timing {
        cfg.timing = false;
    }
    let out = cli.out.or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let manifest = run_experiment(&cfg, &out)?;
    for f in &manifest.files {
        println!("{}  {}", f.sha256, out.join(&f.file).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("robsub: {e}");
            ExitCode::FAILURE
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gevrey_lab::experiment::{run, CocycleSpec, ExperimentConfig, ExperimentKind, RunError};
use gevrey_lab::SamplerSpec;

/// Thread count for the compute pool; unset means one per core.
const THREADS_ENV: &str = "GEVREY_THREADS";

#[derive(Parser)]
#[command(
    name = "gevrey-lab",
    version,
    about = "Lyapunov exponents and large deviations of quasi-periodic Gevrey cocycles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Finite-scale Lyapunov exponents at each N
    Lyapunov(Overrides),
    /// Restricted Diophantine scans of the frequency
    Diophantine(Overrides),
    /// Truncation scheme audit (strip bound, telescoping, margin)
    SchemeAudit(Overrides),
    /// Empirical large-deviation sweep over N
    LdtSweep(Overrides),
    /// Perturbation sweep of the finite-scale exponent
    Continuity(Overrides),
}

#[derive(Args)]
struct Overrides {
    /// TOML experiment file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Frequency components, comma separated
    #[arg(long, value_delimiter = ',')]
    omega: Option<Vec<f64>>,
    /// Scan radii (diophantine), comma separated
    #[arg(long, value_delimiter = ',')]
    k0: Option<Vec<u64>>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Scales N, comma separated
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<u64>>,
    /// JSON cocycle file
    #[arg(long)]
    cocycle: Option<PathBuf>,
    /// Gevrey exponent
    #[arg(long)]
    s: Option<f64>,
    /// LDT exponent
    #[arg(long)]
    c: Option<f64>,
    /// Sampler resolution (points per axis for a grid)
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

impl Command {
    fn split(self) -> (ExperimentKind, Overrides) {
        match self {
            Command::Lyapunov(o) => (ExperimentKind::Lyapunov, o),
            Command::Diophantine(o) => (ExperimentKind::Diophantine, o),
            Command::SchemeAudit(o) => (ExperimentKind::SchemeAudit, o),
            Command::LdtSweep(o) => (ExperimentKind::LdtSweep, o),
            Command::Continuity(o) => (ExperimentKind::Continuity, o),
        }
    }
}

fn build_config(kind: ExperimentKind, o: Overrides) -> Result<ExperimentConfig, RunError> {
    let mut cfg = match &o.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::new(kind),
    };
    cfg.experiment = kind;
    if let Some(v) = o.omega {
        cfg.omega = Some(v);
    }
    if let Some(v) = o.k0 {
        cfg.k0 = Some(v);
    }
    if let Some(v) = o.b {
        cfg.b = v;
    }
    if let Some(v) = o.kappa {
        cfg.kappa = v;
    }
    if let Some(v) = o.n {
        cfg.n = v;
    }
    if let Some(path) = o.cocycle {
        cfg.cocycle = CocycleSpec::File { path };
    }
    if let Some(v) = o.s {
        cfg.s = Some(v);
    }
    if let Some(v) = o.c {
        cfg.c = Some(v);
    }
    if let Some(r) = o.resolution {
        cfg.sampler = match cfg.sampler {
            SamplerSpec::Grid { .. } => SamplerSpec::Grid { resolution: r },
            SamplerSpec::LowDiscrepancy { .. } => SamplerSpec::LowDiscrepancy { resolution: r },
        };
    }
    if let Some(v) = o.seed {
        cfg.seed = v;
    }
    if let Some(v) = o.output_dir {
        cfg.output_dir = v;
    }
    Ok(cfg)
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let (kind, overrides) = cli.command.split();
    let result = build_config(kind, overrides).and_then(|cfg| run(&cfg).map(|m| (cfg, m)));
    match result {
        Ok((cfg, manifest)) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&manifest).expect("manifest serializes")
            );
            eprintln!(
                "{} finished; results in {}",
                kind.name(),
                cfg.output_dir.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

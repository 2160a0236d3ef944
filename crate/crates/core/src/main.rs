use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use nmdyn::config::{BackendKind, ConfigError, ExperimentConfig};
use nmdyn::engine::EngineError;
use nmdyn::harness::{self, Command};
use nmdyn::Error;

#[derive(Parser)]
#[command(name = "nmdyn", version, about = "Dephasing qubit dynamics under local control")]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the configured backend.
    #[arg(long, global = true, value_enum)]
    backend: Option<BackendArg>,
    /// Override the number of quadrature nodes.
    #[arg(long, global = true)]
    nodes: Option<usize>,
    /// Output directory (default: out/<command>).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Optimizer seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Quadrature,
    Lattice,
    Both,
}

#[derive(Subcommand)]
enum Sub {
    /// Trajectory, distances and N for the configured protocol.
    Simulate,
    /// Data behind the trace-distance and non-Markovianity figures.
    Figures {
        /// Figure ids (default: all).
        #[arg(long = "id", value_parser = clap::value_parser!(u8).range(2..=5))]
        ids: Vec<u8>,
        /// Also write SVG line charts.
        #[arg(long)]
        plot: bool,
    },
    /// Summary over an (eta, delta_l) grid from the [sweep] table.
    Sweep,
    /// Step-wise divisibility and the optimal pair.
    Maps,
    /// Search control schedules maximizing N.
    Optimize {
        /// Evaluation budget (overrides the config).
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Re-run a manifest and compare output digests.
    Verify {
        manifest: PathBuf,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        Error::Environment(_) | Error::Protocol(_) => 2,
        Error::Engine(EngineError::Environment(_) | EngineError::Incommensurate { .. }) => 2,
        Error::BackendMismatch { .. } | Error::Engine(_) | Error::Qmath(_) => 3,
        _ => 1,
    }
}

fn load(cli: &Cli, required: bool) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None if required => {
            return Err(ConfigError::Invalid {
                key: "--config".into(),
                line: None,
                message: "this command needs a configuration file".into(),
            }
            .into())
        }
        None => ExperimentConfig::default(),
    };
    if let Some(b) = cli.backend {
        cfg.backend.kind = match b {
            BackendArg::Quadrature => BackendKind::Quadrature,
            BackendArg::Lattice => BackendKind::Lattice,
            BackendArg::Both => BackendKind::Both,
        };
    }
    if let Some(n) = cli.nodes {
        if n < 3 || n % 2 == 0 {
            return Err(ConfigError::Invalid {
                key: "--nodes".into(),
                line: None,
                message: format!("{n} must be odd and at least 3"),
            }
            .into());
        }
        cfg.backend.nodes = n;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), Error> {
    if let Some(w) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build_global()
            .map_err(|e| Error::Invalid(format!("cannot start worker pool: {e}")))?;
    }
    let (command, mut cfg) = match &cli.command {
        Sub::Simulate => (Command::Simulate, load(cli, true)?),
        Sub::Figures { ids, plot } => {
            let ids = if ids.is_empty() { harness::FIGURES.to_vec() } else { ids.clone() };
            (Command::Figures { ids, plot: *plot }, load(cli, false)?)
        }
        Sub::Sweep => (Command::Sweep, load(cli, true)?),
        Sub::Maps => (Command::Maps, load(cli, true)?),
        Sub::Optimize { budget } => {
            let mut cfg = load(cli, true)?;
            let opt = cfg.optimize.get_or_insert_with(Default::default);
            if let Some(b) = budget {
                if *b == 0 {
                    return Err(ConfigError::Invalid {
                        key: "--budget".into(),
                        line: None,
                        message: "at least one evaluation is required".into(),
                    }
                    .into());
                }
                opt.budget = *b;
            }
            (Command::Optimize, cfg)
        }
        Sub::Verify { manifest } => {
            let scratch = cli.out_dir.clone().unwrap_or_else(|| std::env::temp_dir().join("nmdyn-verify"));
            let bad = harness::verify(manifest, &scratch)?;
            if bad.is_empty() {
                println!("all output digests reproduced");
                return Ok(());
            }
            return Err(Error::Invalid(format!("digests differ for: {}", bad.join(", "))));
        }
    };
    if let Some(seed) = cli.seed {
        cfg.optimize.get_or_insert_with(Default::default).seed = seed;
    }
    let out_dir = cli.out_dir.clone().unwrap_or_else(|| harness::default_out_dir(&command));
    let manifest = harness::run(&command, &cfg, &out_dir)?;
    for o in &manifest.outputs {
        println!("{}  {}", o.sha256, out_dir.join(&o.file).display());
    }
    if let Some(d) = manifest.backend_discrepancy {
        println!("backend discrepancy {d:.3e}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

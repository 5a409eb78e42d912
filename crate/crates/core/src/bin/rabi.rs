use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rabi_core::cli::{self, Config, Family, RunOutput, Task};
use rabi_core::{Error, Result};

/// Spin-boson equivalence runs, truncation sweeps and QRM comparisons.
#[derive(Parser)]
#[command(name = "rabi", version)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a config file; the task key picks the experiment.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (defaults to the config's out_dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a named preset as `<name>.conf` into the output directory and run it.
    Preset {
        name: String,
        /// Use the physical qubit splitting ω = 10⁸ν instead of 10³ν.
        #[arg(long)]
        physical_omega: bool,
        #[arg(long)]
        out: PathBuf,
        /// Only write the config.
        #[arg(long)]
        no_run: bool,
    },
    /// Fock-truncation sweep of the target model in a config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Ascending truncations, e.g. 80,160,320.
        #[arg(long, value_delimiter = ',')]
        nmax: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact QRM against its closed-form approximations.
    CompareQrm {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Microwave-ion implementation plan (printed; CSV written with --out).
    PlanMw {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List preset names.
    Presets,
}

fn load(path: &Path) -> Result<Config> {
    Config::parse(&std::fs::read_to_string(path)?)
}

fn out_dir(cfg: &Config, out: Option<PathBuf>) -> Result<PathBuf> {
    out.or_else(|| cfg.out_dir.as_ref().map(PathBuf::from))
        .ok_or_else(|| Error::InvalidConfig("no output directory: pass --out or set out_dir".into()))
}

fn require(cfg: &Config, family: Family) -> Result<()> {
    if cfg.family != family {
        return Err(Error::InvalidConfig(format!("expected family `{}`, found `{}`", family.name(), cfg.family.name())));
    }
    Ok(())
}

fn report(out: &RunOutput, dir: Option<&Path>) -> Result<bool> {
    for (k, v) in &out.summary {
        println!("{k} = {v:.6e}");
    }
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(dir) = dir {
        for path in out.write(dir)? {
            println!("wrote {}", path.display());
        }
    }
    if out.flagged {
        eprintln!("validity monitor flagged; see validity_flag columns");
    }
    Ok(out.flagged)
}

fn run(command: Command) -> Result<bool> {
    match command {
        Command::Run { config, out } => {
            let cfg = load(&config)?;
            let dir = if cfg.task == Task::PlanMw { out.or(cfg.out_dir.as_ref().map(PathBuf::from)) } else { Some(out_dir(&cfg, out)?) };
            report(&cli::execute(&cfg)?, dir.as_deref())
        }
        Command::Preset { name, physical_omega, out, no_run } => {
            let cfg = cli::preset(&name, physical_omega)?;
            std::fs::create_dir_all(&out)?;
            let path = out.join(format!("{name}.conf"));
            std::fs::write(&path, cfg.to_text())?;
            println!("wrote {}", path.display());
            if no_run {
                return Ok(false);
            }
            report(&cli::execute(&cfg)?, Some(&out))
        }
        Command::Sweep { config, nmax, out } => {
            let mut cfg = load(&config)?;
            require(&cfg, Family::Nqrm)?;
            cfg.task = Task::Sweep;
            if !nmax.is_empty() {
                cfg.n_max_list = nmax;
            }
            let dir = out_dir(&cfg, out)?;
            report(&cli::execute(&cfg)?, Some(&dir))
        }
        Command::CompareQrm { config, out } => {
            let cfg = load(&config)?;
            require(&cfg, Family::Qrm)?;
            let dir = out_dir(&cfg, out)?;
            report(&cli::execute(&cfg)?, Some(&dir))
        }
        Command::PlanMw { config, out } => {
            let cfg = load(&config)?;
            require(&cfg, Family::Mw)?;
            report(&cli::execute(&cfg)?, out.as_deref())
        }
        Command::Presets => {
            for name in cli::PRESETS {
                println!("{name}");
            }
            Ok(false)
        }
    }
}

fn configure_workers() -> Result<()> {
    let Ok(raw) = std::env::var("RABI_WORKERS") else {
        return Ok(());
    };
    let workers: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidConfig(format!("RABI_WORKERS must be a positive integer (got `{raw}`)")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))
}

fn main() -> ExitCode {
    let args = Args::parse();
    match configure_workers().and_then(|()| run(args.command)) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

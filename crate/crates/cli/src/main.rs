use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use cim_cli::{replay_file, run, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "cim", version, about = "Class-based interference management experiments")]
struct Cli {
    /// Print the resolved parameter table and exit.
    #[arg(long, global = true)]
    validate: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sweep distance and write metrics.csv.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Also write sinr.svg, capacity.svg and outage.svg.
        #[arg(long)]
        plots: bool,
    },
    /// Feed an admit/release trace to the assignment engine.
    Replay {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn load(path: Option<&PathBuf>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn execute(cli: Cli) -> Result<bool> {
    let config_path = match &cli.command {
        Some(Command::Run { config, .. }) | Some(Command::Replay { config, .. }) => config.as_ref(),
        None => None,
    };
    let config = load(config_path)?;

    if cli.validate {
        print!("{}", config.parameter_table()?);
        return Ok(true);
    }

    match cli.command {
        Some(Command::Run { out_dir, plots, .. }) => {
            let out = run(&config, out_dir.as_deref(), plots)?;
            print!("{}", out.summary);
            println!("wrote {}", out.metrics_path.display());
            for p in &out.plot_paths {
                println!("wrote {}", p.display());
            }
            Ok(true)
        }
        Some(Command::Replay { trace, out_dir, .. }) => {
            let out = replay_file(&config, &trace, out_dir.as_deref())?;
            println!("wrote {}", out.decisions_path.display());
            println!("{}", out.report.conservation_line());
            Ok(out.report.conservation_ok())
        }
        None => anyhow::bail!("no command given; see --help"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fracpinn::cli;
use fracpinn::config::parse_config;
use fracpinn::Error;

#[derive(Parser)]
#[command(
    name = "fracpinn",
    version,
    about = "Meshless crack-tip-enriched PINN solver for 2D linear-elastic fracture"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model from a config file and write checkpoint, log and SIF reports
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Override the config seed
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a built-in benchmark (or "all") over several seeds
    Benchmark {
        /// center-tension | center-shear | edge-tension | slant | all
        id: String,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        seeds: Vec<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Edge-crack length ratio a/b (edge-tension only)
        #[arg(long)]
        ratio: Option<f64>,
        /// Slant angle in degrees (slant only)
        #[arg(long)]
        angle_deg: Option<f64>,
    },
    /// Evaluate a checkpoint on a grid and export displacement/stress/residual CSV
    ExportFields {
        #[arg(long)]
        ckpt: PathBuf,
        /// Evaluation grid as MxN
        #[arg(long, default_value = "50x50")]
        grid: String,
        #[arg(long, default_value = "fields.csv")]
        out: PathBuf,
    },
    /// Re-extract stress intensity factors from a checkpoint
    Extrapolate {
        #[arg(long)]
        ckpt: PathBuf,
        /// Extrapolation window as lo,hi in units of the crack length
        #[arg(long, default_value = "0.05,0.30")]
        window: String,
        #[arg(long, default_value_t = 12)]
        radii: usize,
        /// Tip index to extract from
        #[arg(long, default_value_t = 0)]
        tip: usize,
        /// Optional CSV of the window's K*(r) samples
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(command: Command) -> fracpinn::Result<()> {
    match command {
        Command::Solve { config, seed, out } => {
            let mut run_config = parse_config(&config)?;
            if let Some(seed) = seed {
                run_config.seeds = vec![seed];
                run_config.training.seed = seed;
            }
            run_config.out_dir = cli::resolve_out_dir(&run_config.out_dir, out.as_ref());
            cli::cmd_solve(&run_config)
        }
        Command::Benchmark { id, seeds, out, ratio, angle_deg } => {
            if seeds.is_empty() {
                return Err(Error::Config("need at least one seed".into()));
            }
            cli::cmd_benchmark(&id, &seeds, &out, ratio, angle_deg)
        }
        Command::ExportFields { ckpt, grid, out } => {
            let grid = cli::parse_grid_arg(&grid)?;
            cli::cmd_export_fields(&ckpt, grid, &out)
        }
        Command::Extrapolate { ckpt, window, radii, tip, out } => {
            let window = cli::parse_window_arg(&window)?;
            cli::cmd_extrapolate(&ckpt, window, radii, tip, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let args = Cli::parse();
    match run(args.command) {
        Ok(()) => ExitCode::from(cli::EXIT_OK as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(cli::exit_code(&err) as u8)
        }
    }
}

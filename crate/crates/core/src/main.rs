use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rbnedit::cli::{self, exit_code, resolve_seed};
use rbnedit::experiments::figures::FigureId;

#[derive(Parser)]
#[command(
    name = "rbnedit",
    version,
    about = "Evolve Boolean networks with RNA editing on NK/NKCS landscapes"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Root seed; overrides RBNEDIT_SEED and the config file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Build a figure dataset and SVG chart from a results directory.
    Figure {
        /// fig4 .. fig9
        figure: String,
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Write NA cells instead of failing on an incomplete grid.
        #[arg(long)]
        allow_gaps: bool,
    },
    /// Welch t-test on one numeric column of two CSV files.
    Ttest {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        column: String,
    },
    /// Treatment vs scrambled-reconnection control.
    Control {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Dump the landscapes a config uses for one landscape index.
    Landscape {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Re-run one cell and dump its final genome.
    Genome {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        landscape: usize,
        #[arg(long, default_value_t = 0)]
        run: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn dispatch(cmd: Command) -> rbnedit::Result<()> {
    match cmd {
        Command::Run {
            config,
            out,
            seed,
            jobs,
        } => {
            let sweep = cli::cmd_run(&config, &out, resolve_seed(seed)?, jobs)?;
            eprintln!("{} runs written to {}", sweep.records.len(), out.display());
        }
        Command::Figure {
            figure,
            results,
            out,
            allow_gaps,
        } => {
            let fig: FigureId = figure.parse()?;
            for p in cli::cmd_figure(fig, &results, &out, allow_gaps)? {
                eprintln!("wrote {}", p.display());
            }
        }
        Command::Ttest { a, b, column } => {
            println!("{}", cli::cmd_ttest(&a, &b, &column)?);
        }
        Command::Control {
            config,
            out,
            seed,
            jobs,
        } => {
            let p = cli::cmd_control(&config, &out, resolve_seed(seed)?, jobs)?;
            eprintln!("wrote {}", p.display());
        }
        Command::Landscape {
            config,
            index,
            out,
            seed,
        } => {
            for p in cli::cmd_landscape(&config, index, &out, resolve_seed(seed)?)? {
                eprintln!("wrote {}", p.display());
            }
        }
        Command::Genome {
            config,
            landscape,
            run,
            out,
            seed,
        } => {
            cli::cmd_genome(&config, landscape, run, &out, resolve_seed(seed)?)?;
            eprintln!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match dispatch(args.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}

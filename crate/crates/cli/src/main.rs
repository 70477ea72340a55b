use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use croann_cli::commands::{self, Overrides};

#[derive(Parser)]
#[command(
    name = "croann",
    version,
    about = "Train neural network classifiers with chemical reaction optimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Run configuration (key = value file)
    #[arg(long)]
    config: PathBuf,
    /// Worker threads for trials
    #[arg(long)]
    jobs: Option<usize>,
    /// Base seed; overrides run.seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides run.out
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            jobs: self.jobs,
            seed: self.seed,
            out: self.out.clone(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run all trials of a configuration and write summary.csv, trials.csv and manifest.txt
    Train(RunArgs),
    /// Repeat the trials for each value of one CRO parameter and write sweep.csv
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Parameter key, e.g. operators.gaussian_variance or cro.pop_size
        #[arg(long)]
        param: String,
        /// Comma-separated values
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
    /// Tabulate every run found under a directory next to the published results
    Report {
        /// Directory containing run directories
        dir: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Train(run) => commands::train(&run.config, &run.overrides()).map(|out| {
            println!("wrote {}", out.display());
        }),
        Command::Sweep { run, param, values } => {
            commands::sweep(&run.config, param, values, &run.overrides()).map(|out| {
                println!("wrote {}", out.join(commands::SWEEP_CSV).display());
            })
        }
        Command::Report { dir } => commands::report(dir).map(|table| print!("{table}")),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

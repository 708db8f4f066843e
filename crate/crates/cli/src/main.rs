use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use cvcl_cli::{run, Command, RunArgs};

#[derive(Clone, Copy, ValueEnum)]
enum Sub {
    Measure,
    Dynamics,
    Counterexample,
    Witness,
    McCheck,
    Stepmask,
}

/// Position-basis coherence computations.
#[derive(Parser)]
#[command(name = "cvcl", version)]
struct Cli {
    #[arg(value_enum)]
    command: Sub,
    /// `key = value` file; omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Also write an SVG plot.
    #[arg(long)]
    plot: bool,
    /// Overrides the `seed` key.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match cli.command {
        Sub::Measure => Command::Measure,
        Sub::Dynamics => Command::Dynamics,
        Sub::Counterexample => Command::Counterexample,
        Sub::Witness => Command::Witness,
        Sub::McCheck => Command::McCheck,
        Sub::Stepmask => Command::Stepmask,
    };
    let args = RunArgs {
        command,
        config: cli.config,
        out_dir: cli.out,
        plot: cli.plot,
        seed: cli.seed,
    };
    match run(&args) {
        Ok(summary) => {
            println!("{}", serde_json::to_string_pretty(&summary).expect("JSON values serialize"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("cvcl {}: {e}", command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

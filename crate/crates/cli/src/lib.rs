//! Command-line driver: reads a `key = value` config, runs one computation,
//! writes `<command>.csv`, `<command>.json` and optionally `<command>.svg`.

pub mod commands;
pub mod config;
pub mod output;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::config::{parse_document, ConfigError, KeySpec, Resolved, Value};
use crate::output::svg_polyline;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Measure,
    Dynamics,
    Counterexample,
    Witness,
    McCheck,
    Stepmask,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Measure => "measure",
            Command::Dynamics => "dynamics",
            Command::Counterexample => "counterexample",
            Command::Witness => "witness",
            Command::McCheck => "mc-check",
            Command::Stepmask => "stepmask",
        }
    }

    pub fn schema(self) -> &'static [KeySpec] {
        match self {
            Command::Measure => commands::MEASURE_KEYS,
            Command::Dynamics => commands::DYNAMICS_KEYS,
            Command::Counterexample => commands::COUNTEREXAMPLE_KEYS,
            Command::Witness => commands::WITNESS_KEYS,
            Command::McCheck => commands::MC_KEYS,
            Command::Stepmask => commands::STEPMASK_KEYS,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Numeric(cvcl_core::Error),
    /// A result column holds a value it must not (NaN, or ∞ where not allowed).
    Invalid(&'static str),
    Io(PathBuf, std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) | CliError::Invalid(_) => 3,
            CliError::Io(..) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Numeric(e) => write!(f, "numerical error: {e}"),
            CliError::Invalid(column) => write!(f, "column `{column}` holds a non-finite value"),
            CliError::Io(path, e) => write!(f, "{}: {e}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<cvcl_core::Error> for CliError {
    fn from(e: cvcl_core::Error) -> Self {
        CliError::Numeric(e)
    }
}

pub struct RunArgs {
    pub command: Command,
    /// `None` runs with every default.
    pub config: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub plot: bool,
    /// Overrides the `seed` key.
    pub seed: Option<u64>,
}

/// Resolves the config for `command` from file text.
pub fn resolve(command: Command, text: &str) -> Result<Resolved, ConfigError> {
    Resolved::resolve(command.schema(), &parse_document(text)?)
}

/// Runs a command and returns the JSON summary that was also written to disk.
pub fn run(args: &RunArgs) -> Result<serde_json::Value, CliError> {
    let text = match &args.config {
        Some(path) => fs::read_to_string(path).map_err(|e| CliError::Io(path.clone(), e))?,
        None => String::new(),
    };
    let mut resolved = resolve(args.command, &text)?;
    if let Some(seed) = args.seed {
        resolved.set("seed", Value::Seed(seed));
    }
    let outcome = match args.command {
        Command::Measure => commands::measure(&resolved),
        Command::Dynamics => commands::dynamics(&resolved),
        Command::Counterexample => commands::counterexample(&resolved),
        Command::Witness => commands::witness(&resolved),
        Command::McCheck => commands::mc_check(&resolved),
        Command::Stepmask => commands::stepmask(&resolved),
    }?;
    if let Some(column) = outcome.table.invalid_column() {
        return Err(CliError::Invalid(column));
    }

    let name = args.command.name();
    let summary = json!({
        "command": name,
        "config": resolved.to_strings(),
        "rows": outcome.table.rows.len(),
        "columns": outcome.table.columns,
        "verdict": outcome.verdict,
    });
    fs::create_dir_all(&args.out_dir).map_err(|e| CliError::Io(args.out_dir.clone(), e))?;
    let csv = outcome
        .table
        .to_csv()
        .map_err(|e| CliError::Io(args.out_dir.clone(), std::io::Error::other(e)))?;
    write(&args.out_dir, &format!("{name}.csv"), &csv)?;
    let mut text = serde_json::to_string_pretty(&summary).expect("JSON values serialize");
    text.push('\n');
    write(&args.out_dir, &format!("{name}.json"), text.as_bytes())?;
    if args.plot {
        if let Some((x, y)) = outcome.plot {
            let xs = outcome.table.column(x).expect("plot column exists");
            let ys = outcome.table.column(y).expect("plot column exists");
            let svg = svg_polyline(&xs, &ys, x, y, name);
            write(&args.out_dir, &format!("{name}.svg"), svg.as_bytes())?;
        }
    }
    Ok(summary)
}

fn write(dir: &Path, file: &str, bytes: &[u8]) -> Result<(), CliError> {
    let path = dir.join(file);
    fs::write(&path, bytes).map_err(|e| CliError::Io(path, e))
}

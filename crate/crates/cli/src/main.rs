mod args;
mod check_dirac;
mod pullback;
mod simulate;

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use thiserror::Error;
use vakonomic::{systems, Error as CoreError, SystemDefinition, SystemSpec, BUILTIN_NAMES};

use args::{Cli, Command, OutputArgs, SystemArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: io::Error },
    #[error("cannot read {path}: {source}")]
    Input { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Solver(CoreError),
    #[error("{0}")]
    CheckFailed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Output { .. } | CliError::Input { .. } => 1,
            CliError::Solver(_) | CliError::CheckFailed(_) => 2,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::UnknownSystem(_)
            | CoreError::InvalidConfig(_)
            | CoreError::Definition(_)
            | CoreError::Parse(_)
            | CoreError::DimensionMismatch { .. } => CliError::Usage(e.to_string()),
            other => CliError::Solver(other),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn parse_overrides(raw: &[String]) -> CliResult<BTreeMap<String, f64>> {
    raw.iter()
        .map(|item| {
            let (name, value) =
                item.split_once('=').ok_or_else(|| CliError::Usage(format!("--param expects NAME=VALUE, got `{item}`")))?;
            let value =
                value.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("--param {name}: `{value}` is not a number")))?;
            Ok((name.trim().to_string(), value))
        })
        .collect()
}

pub fn load_system(args: &SystemArgs) -> CliResult<SystemSpec> {
    let overrides = parse_overrides(&args.params)?;
    if let Some(name) = &args.source.system {
        return Ok(systems::builtin_with(name, &overrides)?);
    }
    let path = args.source.file.as_ref().ok_or_else(|| CliError::Usage("one of --system or --file is required".into()))?;
    let text = fs::read_to_string(path).map_err(|source| CliError::Input { path: path.clone(), source })?;
    let mut def = SystemDefinition::parse(&text)?;
    for (k, v) in overrides {
        match def.params.get_mut(&k) {
            Some(slot) => *slot = v,
            None => return Err(CliError::Usage(format!("system `{}` has no parameter `{k}`", def.name))),
        }
    }
    Ok(def.build()?)
}

pub fn write_file(path: &Path, contents: &[u8]) -> CliResult<()> {
    fs::write(path, contents).map_err(|source| CliError::Output { path: path.to_path_buf(), source })
}

/// Writes the JSON report to its file or stdout, and the summary lines to stderr.
pub fn emit(output: &OutputArgs, json: &str, summary: &[String]) -> CliResult<()> {
    match &output.report {
        Some(path) => write_file(path, format!("{json}\n").as_bytes())?,
        None => {
            let mut out = io::stdout().lock();
            writeln!(out, "{json}").map_err(|source| CliError::Output { path: "<stdout>".into(), source })?;
        }
    }
    if !output.quiet {
        for line in summary {
            eprintln!("{line}");
        }
    }
    Ok(())
}

fn list_systems() -> CliResult<()> {
    for name in BUILTIN_NAMES {
        let spec = vakonomic::builtin(name)?;
        let params: Vec<String> = spec.params().iter().map(|(k, v)| format!("{k}={v}")).collect();
        println!("{name}\tn={}\tm={}\t{}", spec.n(), spec.m(), params.join(" "));
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate(a) => simulate::run(&a),
        Command::Pullback(a) => pullback::run(&a),
        Command::CheckDirac(a) => check_dirac::run(&a),
        Command::ListSystems => list_systems(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

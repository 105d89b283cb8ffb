//! Command-line front end: argument and config-file handling, dispatch, CSV output.

pub mod args;
pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::parser::ValueSource;
use clap::{CommandFactory, FromArgMatches};

pub use args::Cli;
pub use commands::{dispatch, Outcome};

fn usage_error(msg: impl std::fmt::Display) -> clap::Error {
    Cli::command().error(ErrorKind::InvalidValue, msg)
}

/// Parses `argv` (program name first) and merges a `--config` file.
///
/// Each `key=value` line becomes `--key=value` unless that flag was given on the
/// command line, so explicit flags win and the file wins over environment defaults.
pub fn parse_args<I, T>(argv: I) -> Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let mut cmd = Cli::command();
    let matches = cmd.try_get_matches_from_mut(argv.clone())?;
    let first = Cli::from_arg_matches(&matches)?;
    let Some(path) = &first.config else {
        return Ok(first);
    };
    let entries = config::read_config(path).map_err(|e| usage_error(format!("--config: {e}")))?;

    cmd.build();
    let mut leaf_cmd = &cmd;
    let mut leaf = &matches;
    while let Some((name, sub)) = leaf.subcommand() {
        leaf_cmd = leaf_cmd
            .find_subcommand(name)
            .expect("matched subcommand exists");
        leaf = sub;
    }
    let mut merged = argv;
    for (key, value) in entries {
        let arg = leaf_cmd
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()) && key != "config")
            .ok_or_else(|| usage_error(format!("--config: unknown key `{key}` for this subcommand")))?;
        if leaf.value_source(arg.get_id().as_str()) != Some(ValueSource::CommandLine) {
            merged.push(format!("--{key}={value}").into());
        }
    }
    let matches = Cli::command().try_get_matches_from(merged)?;
    Cli::from_arg_matches(&matches)
}

/// Runs the program and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match parse_args(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(w) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("error: --workers: {e}");
            return 2;
        }
    }
    match dispatch(&cli) {
        Ok(Outcome::Pass) => 0,
        Ok(Outcome::Fail) => 1,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<pitman_core::Error>() {
                Some(pitman_core::Error::InvalidParameter { .. }) => 2,
                _ => 1,
            }
        }
    }
}

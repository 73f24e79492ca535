//! `rankkernel` command-line tool.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 infeasible request
//! (enumeration too large, unsupported scale), 3 property failure (PSD
//! check, self-check).

mod args;
mod commands;

use std::fmt;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use rankkernel::Error;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use args::{Cli, Command};

pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    fn property(message: impl fmt::Display) -> Self {
        Self {
            code: 3,
            message: message.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Infeasible { .. } | Error::UnsupportedScale(_) => 2,
            Error::NotPositiveSemidefinite { .. } => 3,
            _ => 1,
        };
        let message = match &e {
            Error::NotPositiveSemidefinite { diagnostics, .. } => format!("{e}\n{diagnostics}"),
            _ => e.to_string(),
        };
        Self { code, message }
    }
}

/// Options from the config file, overridden by those given as flags.
fn merge<T: Serialize + DeserializeOwned>(flags: &T, config: &Option<Value>) -> Result<T, Failure> {
    let mut base = match config {
        Some(Value::Object(m)) => m.clone(),
        Some(_) => return Err(Failure::usage("config file must hold a JSON object")),
        None => serde_json::Map::new(),
    };
    if let Value::Object(over) = serde_json::to_value(flags).expect("arguments serialise") {
        base.extend(over);
    }
    serde_json::from_value(Value::Object(base))
        .map_err(|e| Failure::usage(format!("config file: {e}")))
}

fn load_config(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("RANKKERNEL_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure::usage(format!("RANKKERNEL_THREADS must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::usage(e.to_string()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    let config = cli.config.as_deref().map(load_config).transpose()?;
    match &cli.command {
        Command::Gram(a) => commands::gram(&merge(a, &config)?),
        Command::Mmd(a) => commands::mmd(&merge(a, &config)?),
        Command::Cluster(a) => commands::cluster(&merge(a, &config)?),
        Command::Sample(a) => commands::sample(&merge(a, &config)?),
        Command::Selfcheck(a) => commands::selfcheck(&merge(a, &config)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

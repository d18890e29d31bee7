mod args;
mod commands;
mod config;
mod report;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use config::RunConfig;

#[derive(Debug, Clone)]
pub enum Failure {
    Validation(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Validation(m) => write!(f, "invalid input: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<regge_core::Error> for Failure {
    fn from(e: regge_core::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Validation(e.to_string())
        }
    }
}

fn run(cli: &Cli) -> Result<commands::Outcome, Failure> {
    let cfg = RunConfig::from_cli(cli)?;
    let outcome = match cli.command {
        Command::Trajectory { .. } => commands::trajectory(&cfg)?,
        Command::Renorm { .. } => commands::renorm(&cfg)?,
        Command::Table1 { .. } => commands::table1(&cfg)?,
    };
    let text = outcome.report.render(cfg.format, cfg.precision);
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(text.as_bytes());
    let _ = stdout.flush();
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let failures = match run(&cli) {
        Ok(outcome) => outcome.failures,
        Err(f) => vec![f],
    };
    for f in &failures {
        eprintln!("regge: {f}");
    }
    ExitCode::from(failures.iter().map(Failure::code).max().unwrap_or(0))
}

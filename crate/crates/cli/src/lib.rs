//! Command-line front end: argument and config-file handling, the commands
//! themselves and exit-code mapping.

pub mod commands;
pub mod config;

use std::path::Path;

use fgn_equiv::report::Report;

pub use config::{parse_n_grid, Cli, Command, Format, FunctionKind, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numeric(#[from] fgn_equiv::Error),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(fgn_equiv::Error::InvalidHurst(_)) => 2,
            CliError::Numeric(_) => 4,
            CliError::Io { .. } => 4,
        }
    }
}

/// Exit code for a finished run.
pub fn exit_code(report: &Report) -> i32 {
    if report.all_pass() {
        0
    } else {
        3
    }
}

/// Default output format of a command.
pub fn default_format(command: Command) -> Format {
    match command {
        Command::Verify | Command::Bounds => Format::Json,
        _ => Format::Csv,
    }
}

pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Csv => report.to_csv(),
        Format::Json => {
            let mut s = report.to_json();
            s.push('\n');
            s
        }
    }
}

/// Runs a merged configuration and returns the report with its rendering.
pub fn run(cfg: &RunConfig) -> Result<(Report, String), CliError> {
    let report = commands::dispatch(cfg)?;
    let text = render(&report, cfg.format.unwrap_or_else(|| default_format(cfg.command)));
    Ok((report, text))
}

pub fn write_output(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io { path: p.display().to_string(), source }),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}

/// Full pipeline from parsed arguments to exit code.
pub fn main_with(cli: &Cli) -> i32 {
    let cfg = match RunConfig::from_cli(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let result = run(&cfg).and_then(|(report, text)| {
        write_output(cfg.out.as_deref(), &text)?;
        Ok(report)
    });
    match result {
        Ok(report) => {
            for c in report.failures() {
                log::error!("check {} failed: value {} tolerance {}", c.check_name, c.value, c.tolerance);
            }
            exit_code(&report)
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

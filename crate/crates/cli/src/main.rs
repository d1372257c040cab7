//! `nnbounds` command-line interface.
//!
//! Exit status: 0 on success or a passed verification, 1 when `lip-verify`
//! finds a violation, 2 on invalid input or usage.

mod args;
mod commands;
mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{CommandFactory, Parser};
use nnbounds::{Error, Result};

use args::{Cli, Command, Format, OutputArgs};
use commands::Report;

/// Environment variable naming the directory for relative `--out` paths.
const OUT_DIR_VAR: &str = "NNBOUNDS_OUT_DIR";

fn subcommand_names() -> Vec<String> {
    Cli::command()
        .get_subcommands()
        .map(|c| c.get_name().to_string())
        .collect()
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
}

fn render(report: &Report, format: Option<Format>) -> Result<Vec<u8>> {
    if format.is_none() {
        if let Some(plain) = &report.plain {
            return Ok(plain.clone().into_bytes());
        }
    }
    match format.unwrap_or(report.default_format) {
        Format::Json => {
            let mut text =
                serde_json::to_vec_pretty(&report.json).map_err(|e| Error::Parse(e.to_string()))?;
            text.push(b'\n');
            Ok(text)
        }
        Format::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            for row in &report.rows {
                writer
                    .write_record(row)
                    .map_err(|e| Error::Parse(e.to_string()))?;
            }
            writer.into_inner().map_err(|e| Error::Parse(e.to_string()))
        }
    }
}

fn resolve_out(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_VAR) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn emit(report: &Report, output: &OutputArgs) -> Result<()> {
    let bytes = render(report, output.format)?;
    match &output.out {
        Some(path) => {
            let path = resolve_out(path);
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            fs::write(&path, bytes)?;
            log::info!("wrote {}", path.display());
        }
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(Error::Input("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::Input(format!("thread pool: {e}")))?;
    }
    let (report, output) = match &cli.command {
        Command::Count(a) => (commands::count(a)?, &a.output),
        Command::LipBound(a) => (commands::lip_bound(a)?, &a.output),
        Command::LipVerify(a) => (commands::lip_verify(a)?, &a.output),
        Command::Entropy(a) => (commands::entropy(a)?, &a.output),
        Command::Bound(a) => (commands::bound(a)?, &a.output),
        Command::Tradeoff(a) => (commands::tradeoff(a)?, &a.output),
        Command::Super(a) => (commands::superconvergence(a)?, &a.output),
        Command::Approx(a) => (commands::approx(a)?, &a.output),
    };
    emit(&report, output)?;
    Ok(report.pass)
}

fn main() -> ExitCode {
    let names = subcommand_names();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    let argv = match config::expand(std::env::args_os().collect(), &names) {
        Ok(argv) => argv,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    init_logging(cli.verbose);
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dressed_squeeze::runner::{parse_config, run_scenario, RunConfig, Scenario};
use dressed_squeeze::Error;

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_GUARD: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

/// Two-mode squeezing from a driven three-level atom in a two-mode cavity.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write one CSV row per sample time.
    Run {
        /// `key = value` config file.
        #[arg(long)]
        config: PathBuf,
        /// CSV destination; overrides `output` in the config. Stdout if neither is set.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides `scenario` in the config.
        #[arg(long)]
        scenario: Option<Scenario>,
    },
}

fn main() -> ExitCode {
    let Command::Run { config, out, scenario } = Cli::parse().command;
    match run(config, out, scenario) {
        Ok(code) => ExitCode::from(code),
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn load(path: &PathBuf, scenario: Option<Scenario>) -> Result<RunConfig, Error> {
    let text = std::fs::read_to_string(path)?;
    let mut cfg = parse_config(&text)?;
    if let Some(s) = scenario {
        cfg.scenario = s;
        cfg.validate()?;
    }
    Ok(cfg)
}

fn run(config: PathBuf, out: Option<PathBuf>, scenario: Option<Scenario>) -> Result<u8, (u8, String)> {
    let cfg = load(&config, scenario).map_err(|e| (EXIT_CONFIG, format!("{}: {e}", config.display())))?;
    let output = run_scenario(&cfg).map_err(|e| match e {
        Error::ConfigParse { .. } | Error::ConfigInvalid(_) => (EXIT_CONFIG, e.to_string()),
        e => (EXIT_NUMERICAL, e.to_string()),
    })?;

    let io_err = |e: Error| (EXIT_IO, e.to_string());
    match out.or_else(|| cfg.output.clone()) {
        Some(path) => {
            let file = File::create(&path).map_err(|e| (EXIT_IO, format!("{}: {e}", path.display())))?;
            output.write_csv(BufWriter::new(file)).map_err(io_err)?;
        }
        None => output.write_csv(io::stdout().lock()).map_err(io_err)?,
    }

    let mut stderr = io::stderr().lock();
    let _ = writeln!(stderr, "scenario = {}", cfg.scenario);
    let _ = output.summary.write_to(&mut stderr);
    Ok(if output.summary.reliable() { 0 } else { EXIT_GUARD })
}

//! `qwitness`: thermal simulations, entanglement witnesses and QFI from
//! spectra, with CSV / JSON-lines / SVG output.

mod config;
mod error;
mod output;
mod run;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Command, Format, RunConfig};
use error::CliError;
use output::Writer;

#[derive(Parser)]
#[command(
    name = "qwitness",
    version,
    about = "Entanglement witnesses for spin models and spectra"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Thermal summary and binned chi'' spectra for each temperature
    Simulate(Common),
    /// Static witnesses (concurrence, discord, susceptibility, tangles)
    Witness(Common),
    /// QFI, nQFI and coherence measures per wavevector
    Qfi(Common),
    /// Numeric QFI and entanglement depth from a spectrum file
    IngestQfi(Common),
    /// Every listed witness over the temperature and wavevector grid
    Sweep(Common),
    /// Table and plots rebuilt from an earlier run's summary.jsonl
    Report(Common),
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding the config
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated output formats: csv, json, svg
    #[arg(long, value_delimiter = ',')]
    format: Option<Vec<String>>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Margin by which a witness bound must be violated
    #[arg(long)]
    tolerance: Option<f64>,
}

impl Sub {
    fn split(self) -> (Command, Common) {
        match self {
            Sub::Simulate(c) => (Command::Simulate, c),
            Sub::Witness(c) => (Command::Witness, c),
            Sub::Qfi(c) => (Command::Qfi, c),
            Sub::IngestQfi(c) => (Command::IngestQfi, c),
            Sub::Sweep(c) => (Command::Sweep, c),
            Sub::Report(c) => (Command::Report, c),
        }
    }
}

fn load(command: Command, args: &Common) -> Result<config::Resolved, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let mut c = RunConfig::load(path)?;
            c.rebase(path.parent().unwrap_or(std::path::Path::new(".")));
            c
        }
        None if command == Command::Report => RunConfig::parse("")?,
        None => return Err(CliError::Config("--config is required".into())),
    };
    if let Some(out) = &args.out {
        cfg.out = out.clone();
    }
    if let Some(f) = &args.format {
        cfg.formats = f.iter().map(|s| s.parse::<Format>()).collect::<Result<_, _>>()?;
    }
    if let Some(t) = args.tolerance {
        cfg.tolerance = Some(t);
    }
    cfg.resolve(command)
}

fn set_threads(n: Option<usize>) -> Result<(), CliError> {
    let Some(n) = n else { return Ok(()) };
    if n == 0 {
        return Err(CliError::Config("--threads must be at least 1".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    log::warn!("built without the parallel feature; --threads {n} ignored");
    Ok(())
}

/// Runs one command; the `Ok` value is the exit code for partial failures.
fn execute(command: Command, args: Common) -> Result<i32, CliError> {
    set_threads(args.threads)?;
    let resolved = load(command, &args)?;
    let out = resolved.config.out.clone();
    match command {
        Command::Simulate => {
            let sims = run::run_simulate(&resolved)?;
            let prov = output::provenance(&resolved, &[], Vec::new())?;
            let mut w = Writer::new(&out, &resolved, &prov)?;
            w.simulate(&sims)?;
            w.provenance()?;
            println!("{} temperatures written to {}", sims.len(), out.display());
            Ok(0)
        }
        Command::Witness | Command::Qfi | Command::Sweep => {
            let res = run::run_sweep(&resolved)?;
            let prov = output::provenance(&resolved, &[], Vec::new())?;
            let mut w = Writer::new(&out, &resolved, &prov)?;
            w.sweep(&res.rows, &res.failures)?;
            w.provenance()?;
            for f in &res.failures {
                eprintln!("error at {}: {}", f.coordinate(), f.error);
            }
            let certified = res
                .rows
                .iter()
                .filter(|r| r.report.certification.is_certified())
                .count();
            println!(
                "{} values ({} certified), {} failures, written to {}",
                res.rows.len(),
                certified,
                res.failures.len(),
                out.display()
            );
            Ok(res.failures.iter().map(|f| f.error.exit_code()).max().unwrap_or(0))
        }
        Command::IngestQfi => {
            let res = run::run_ingest(&resolved)?;
            for warning in &res.warnings {
                log::warn!("{warning}");
            }
            let file = resolved.config.ingest.as_ref().expect("validated").file.clone();
            let prov = output::provenance(&resolved, &[file], res.warnings.clone())?;
            let mut w = Writer::new(&out, &resolved, &prov)?;
            w.ingest(&res)?;
            w.provenance()?;
            for r in &res.rows {
                println!(
                    "k={:.6} f_Q={:.6} nQFI={:.6} depth>={} +-{:.2e}",
                    r.k.unwrap_or(f64::NAN),
                    r.report.value,
                    r.report.extra.get("nqfi").copied().unwrap_or(f64::NAN),
                    r.report.extra.get("depth_lower").copied().unwrap_or(1.0) as usize,
                    r.report.extra.get("uncertainty").copied().unwrap_or(f64::NAN)
                );
            }
            Ok(0)
        }
        Command::Report => {
            let summary = out.join("summary.jsonl");
            let lines = output::read_summary(&summary)?;
            let prov = output::provenance(&resolved, &[summary], Vec::new())?;
            let mut w = Writer::new(&out, &resolved, &prov)?;
            let text = w.report(&lines)?;
            print!("{text}");
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (command, args) = cli.command.split();
    let code = match execute(command, args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qwitness: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

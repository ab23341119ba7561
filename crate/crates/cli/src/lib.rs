//! Command-line scenario runner: time series, parameter sweeps and JSON
//! reports for the two-qubit relaxation model.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod report;
pub mod scenario;

pub use config::{RawConfig, ScenarioConfig};
pub use error::CliError;
use output::Format;

#[derive(Debug, Parser)]
#[command(name = "relaxometer", version, about = "Two-qubit relaxation scenarios")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the time series of one scenario.
    Run(ScenarioArgs),
    /// Write one time series per value of a swept parameter.
    Sweep(SweepArgs),
    /// Write a JSON summary: rates, equilibrium, relaxation time.
    Report(ReportArgs),
    /// List the named presets.
    Presets,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Named starting configuration.
    #[arg(long)]
    pub preset: Option<String>,
    /// TOML file layered over the preset.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `key=value` override, applied last; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Output path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format; csv for time series, json for reports.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Swept parameter: beta, kappa or delta.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Comma-separated values of the swept parameter.
    #[arg(long)]
    pub values: Option<String>,
    /// Concurrent sweep points; 0 uses every core.
    #[arg(long, env = "RELAXOMETER_JOBS", default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Comma-separated report fields that must converge.
    #[arg(long)]
    pub require: Option<String>,
}

impl ScenarioArgs {
    pub fn raw(&self) -> Result<RawConfig, CliError> {
        let mut raw = match &self.preset {
            Some(name) => RawConfig::from_preset(name)?,
            None => RawConfig::default(),
        };
        if let Some(path) = &self.config {
            raw.overlay_file(path)?;
        }
        for s in &self.set {
            raw.set(s)?;
        }
        Ok(raw)
    }

    fn sink(&self) -> Result<Box<dyn Write>, CliError> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Run(args) => {
            let cfg = args.raw()?.validate()?;
            let rows = scenario::run_scenario(&cfg)?;
            let mut out = args.sink()?;
            match args.format.unwrap_or(Format::Csv) {
                Format::Csv => output::write_rows_csv(&mut out, &rows)?,
                Format::Json => output::write_rows_json(&mut out, &rows)?,
            }
            out.flush()?;
        }
        Command::Sweep(args) => {
            let mut raw = args.scenario.raw()?;
            if let Some(axis) = &args.sweep {
                raw.insert("sweep", toml::Value::String(axis.clone()));
            }
            if let Some(values) = &args.values {
                let list = config::parse_values(values)?;
                raw.insert("values", toml::Value::Array(list.into_iter().map(toml::Value::Float).collect()));
            }
            let cfg = raw.validate()?;
            let (axis, values) = cfg.sweep.ok_or_else(|| CliError::config("sweep", "missing sweep axis"))?;
            let table = scenario::run_sweep(&raw, axis, &values, args.jobs)?;
            let mut out = args.scenario.sink()?;
            match args.scenario.format.unwrap_or(Format::Csv) {
                Format::Csv => output::write_sweep_csv(&mut out, &table)?,
                Format::Json => output::write_sweep_json(&mut out, &table)?,
            }
            out.flush()?;
        }
        Command::Report(args) => {
            if args.scenario.format == Some(Format::Csv) {
                return Err(CliError::config("format", "report is written as json only"));
            }
            let mut raw = args.scenario.raw()?;
            if let Some(list) = &args.require {
                let mut fields: Vec<String> = match raw.table.get("require") {
                    Some(toml::Value::Array(items)) => {
                        items.iter().filter_map(|v| v.as_str().map(String::from)).collect()
                    }
                    Some(toml::Value::String(s)) => vec![s.clone()],
                    _ => Vec::new(),
                };
                fields.extend(list.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()));
                raw.insert("require", toml::Value::Array(fields.into_iter().map(toml::Value::String).collect()));
            }
            let cfg = raw.validate()?;
            let report = report::build_report(&cfg)?;
            let mut out = args.scenario.sink()?;
            serde_json::to_writer_pretty(&mut out, &report)?;
            out.write_all(b"\n")?;
            out.flush()?;
            report::check_required(&report, &cfg.require)?;
        }
        Command::Presets => {
            let mut out = io::stdout().lock();
            for name in presets::NAMES {
                writeln!(out, "{name:<6}  {}", presets::description(name).unwrap_or_default())?;
            }
        }
    }
    Ok(())
}

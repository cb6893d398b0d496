use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, Subcommand};
use ivcov_core::ingest::{bars_to_intervals, list_symbols, read_candles, PanelSpec, ReadReport};
use ivcov_core::io::write_interval_pair;
use serde::Serialize;

use crate::config::Settings;
use crate::error::{CliError, CliResult};
use crate::out_path;
use crate::output::{ensure_dir, write_json};

#[derive(Debug, Clone, Subcommand)]
pub enum IngestCommand {
    /// OHLC bars (`symbol,timestamp,open,high,low,close`) to log-range intervals.
    Candles(CandleArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CandleArgs {
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    /// Comma-separated column order; defaults to every symbol in the file, sorted.
    #[arg(long, value_delimiter = ',')]
    pub symbols: Option<Vec<String>>,
    #[arg(long = "bar-seconds", default_value_t = PanelSpec::DEFAULT_BAR_SECONDS)]
    pub bar_seconds: i64,
    /// Keep only bars on this UTC date (YYYY-MM-DD).
    #[arg(long)]
    pub day: Option<NaiveDate>,
    #[arg(long, default_value = "candles")]
    pub name: String,
}

#[derive(Serialize)]
struct Report<'a> {
    command: &'static str,
    settings: &'a Settings,
    input: String,
    panel: &'a PanelSpec,
    read: &'a ReadReport,
    n: usize,
    p: usize,
}

pub fn run(cmd: &IngestCommand, settings: &Settings) -> CliResult<()> {
    let IngestCommand::Candles(a) = cmd;
    let symbols = match &a.symbols {
        Some(s) => s.clone(),
        None => list_symbols(&a.input)?,
    };
    let spec = PanelSpec::new(symbols, a.bar_seconds, a.day).map_err(|e| CliError::usage(e.to_string()))?;
    let (panel, read) = read_candles(&a.input, &spec)?;
    let data = bars_to_intervals(&panel, &spec)?;
    ensure_dir(&settings.out)?;
    write_interval_pair(&out_path(settings, &a.name), &spec.symbols, &data)?;
    let report = Report {
        command: "ingest candles",
        settings,
        input: a.input.display().to_string(),
        panel: &spec,
        read: &read,
        n: data.n(),
        p: data.p(),
    };
    write_json(&out_path(settings, &format!("{}.report.json", a.name)), &report)
}

//! Candlestick (OHLC) CSV ingestion.
//!
//! Input schema, with a header row: `symbol,timestamp,open,high,low,close`,
//! timestamps in epoch seconds. Each bar becomes the interval
//! `[ln(low/open), ln(high/open)]`.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::path::Path;

use chrono::{DateTime, NaiveDate};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::IntervalMatrix;

pub const CANDLE_HEADER: [&str; 6] = ["symbol", "timestamp", "open", "high", "low", "close"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandleBar {
    pub symbol: String,
    pub timestamp: i64,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
}

impl CandleBar {
    /// Why the bar is unusable, if it is.
    pub fn defect(&self) -> Option<&'static str> {
        let prices = [self.open, self.high, self.low, self.close];
        if prices.iter().any(|v| !v.is_finite()) {
            return Some("non-finite price");
        }
        if prices.iter().any(|&v| v <= 0.0) {
            return Some("nonpositive price");
        }
        if self.low > self.open.min(self.close) {
            return Some("low above open or close");
        }
        if self.high < self.open.max(self.close) {
            return Some("high below open or close");
        }
        None
    }

    /// `(ln(low/open), ln(high/open))`.
    pub fn log_range(&self) -> (f64, f64) {
        ((self.low / self.open).ln(), (self.high / self.open).ln())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelSpec {
    /// Column order of the output.
    pub symbols: Vec<String>,
    pub bar_seconds: i64,
    /// Keep only bars whose timestamp falls on this UTC date.
    pub day: Option<NaiveDate>,
}

impl PanelSpec {
    pub const DEFAULT_BAR_SECONDS: i64 = 300;

    pub fn new(symbols: Vec<String>, bar_seconds: i64, day: Option<NaiveDate>) -> Result<Self> {
        let spec = Self {
            symbols,
            bar_seconds,
            day,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.symbols.is_empty() {
            return Err(Error::invalid("symbol list is empty"));
        }
        let unique: BTreeSet<&String> = self.symbols.iter().collect();
        if unique.len() != self.symbols.len() {
            return Err(Error::invalid("symbol list has duplicates"));
        }
        if self.bar_seconds <= 0 {
            return Err(Error::invalid(format!("bar length must be positive, got {}", self.bar_seconds)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub line: usize,
    pub symbol: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadReport {
    pub rows: usize,
    pub accepted: usize,
    pub rejected: Vec<Rejection>,
    /// Rows for symbols outside the panel.
    pub other_symbols: usize,
    /// Rows outside the requested day.
    pub other_days: usize,
}

/// Bars per symbol, aligned with [`PanelSpec::symbols`] and sorted by time.
#[derive(Debug, Clone, PartialEq)]
pub struct CandlePanel {
    pub symbols: Vec<String>,
    pub bars: Vec<Vec<CandleBar>>,
}

#[derive(Debug, Deserialize)]
struct RawRow {
    symbol: String,
    timestamp: i64,
    open: f64,
    high: f64,
    low: f64,
    close: f64,
}

fn open_reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let header = rdr.headers().map_err(|e| csv_error(path, e))?;
    if header.iter().ne(CANDLE_HEADER.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header {}", CANDLE_HEADER.join(",")),
        });
    }
    Ok(rdr)
}

/// Distinct symbols in the file, sorted.
pub fn list_symbols(path: &Path) -> Result<Vec<String>> {
    let mut rdr = open_reader(path)?;
    let mut out = BTreeSet::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        out.insert(rec[0].to_string());
    }
    if out.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(out.into_iter().collect())
}

pub fn read_candles(path: &Path, spec: &PanelSpec) -> Result<(CandlePanel, ReadReport)> {
    spec.validate()?;
    let column: HashMap<&str, usize> = spec.symbols.iter().enumerate().map(|(k, s)| (s.as_str(), k)).collect();
    let mut rdr = open_reader(path)?;
    let mut report = ReadReport::default();
    let mut bars: Vec<Vec<CandleBar>> = vec![Vec::new(); spec.symbols.len()];
    let mut seen: HashMap<(usize, i64), usize> = HashMap::new();

    for (k, row) in rdr.deserialize::<RawRow>().enumerate() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let line = k + 2;
        report.rows += 1;
        let Some(&col) = column.get(row.symbol.as_str()) else {
            report.other_symbols += 1;
            continue;
        };
        if let Some(day) = spec.day {
            if utc_date(row.timestamp) != Some(day) {
                report.other_days += 1;
                continue;
            }
        }
        if seen.insert((col, row.timestamp), line).is_some() {
            return Err(Error::DuplicateBar {
                symbol: row.symbol,
                timestamp: row.timestamp,
            });
        }
        let bar = CandleBar {
            symbol: row.symbol,
            timestamp: row.timestamp,
            open: row.open,
            high: row.high,
            low: row.low,
            close: row.close,
        };
        let defect = bar.defect().or_else(|| {
            (bar.timestamp.rem_euclid(spec.bar_seconds) != 0).then_some("timestamp not on a bar boundary")
        });
        if let Some(reason) = defect {
            report.rejected.push(Rejection {
                line,
                symbol: bar.symbol,
                reason: reason.to_string(),
            });
            continue;
        }
        report.accepted += 1;
        bars[col].push(bar);
    }
    if report.rows == 0 {
        return Err(Error::EmptyInput);
    }
    for list in &mut bars {
        list.sort_by_key(|b| b.timestamp);
    }
    Ok((
        CandlePanel {
            symbols: spec.symbols.clone(),
            bars,
        },
        report,
    ))
}

fn utc_date(ts: i64) -> Option<NaiveDate> {
    DateTime::from_timestamp(ts, 0).map(|d| d.date_naive())
}

/// One row per bar slot `floor(timestamp / bar_seconds)` present anywhere in
/// the panel. Every symbol must have a bar in every slot.
pub fn bars_to_intervals(panel: &CandlePanel, spec: &PanelSpec) -> Result<IntervalMatrix> {
    spec.validate()?;
    let slot = |b: &CandleBar| b.timestamp.div_euclid(spec.bar_seconds);
    let slots: BTreeSet<i64> = panel.bars.iter().flatten().map(slot).collect();
    if slots.is_empty() {
        return Err(Error::EmptyInput);
    }
    let index: HashMap<i64, usize> = slots.iter().enumerate().map(|(k, &s)| (s, k)).collect();
    let (n, p) = (slots.len(), spec.symbols.len());
    let mut lower = Array2::zeros((n, p));
    let mut upper = Array2::zeros((n, p));

    for (j, symbol) in spec.symbols.iter().enumerate() {
        let k = panel
            .symbols
            .iter()
            .position(|s| s == symbol)
            .ok_or_else(|| Error::invalid(format!("symbol {symbol} is not in the panel")))?;
        let mut filled = vec![false; n];
        for bar in &panel.bars[k] {
            let row = index[&slot(bar)];
            let (lo, hi) = bar.log_range();
            lower[[row, j]] = lo;
            upper[[row, j]] = hi;
            filled[row] = true;
        }
        if let Some(missing) = slots.iter().zip(&filled).find(|(_, f)| !**f) {
            return Err(Error::MissingBar {
                symbol: symbol.clone(),
                slot: *missing.0,
            });
        }
    }
    IntervalMatrix::new(lower, upper)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        csv::ErrorKind::Deserialize { err, .. } => Error::Parse {
            line,
            message: err.to_string(),
        },
        kind => Error::Parse {
            line,
            message: format!("{kind:?}"),
        },
    }
}

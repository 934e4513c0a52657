//! Currency datasets, table analysis and rendering.
//!
//! Datasets are comma-separated with a header row:
//!
//! ```text
//! # source_date: 2018-05-12
//! # source_note: bitinfocharts.com snapshot
//! name,protocol,block_time_s,hashrate_hs,expected_c_mu,note
//! Bitcoin,PoW,600,2.78e19,4.51e-21,
//! ```
//!
//! `block_time_s` is seconds; a value may also carry a unit suffix
//! (`10 min`, `60 s`). Numbers use a `.` decimal point only. Lines starting
//! with `#` are comments, and `# source_date:` / `# source_note:` lines set
//! the dataset metadata.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::coinage::hybrid_complexity;
use crate::complexity::ComplexityValue;
use crate::nxt::pos_complexity;
use crate::pow::{pow_complexity, CurrencyParams, Protocol};
use crate::sim::{empirical_complexity, SimulationReport};

/// Relative tolerance for agreement with a printed three-figure value.
pub const GOLDEN_RELATIVE_TOLERANCE: f64 = 5e-3;

pub const TABLE1_CSV: &str = include_str!("../data/table1.csv");
pub const TABLE2_CSV: &str = include_str!("../data/table2.csv");

const REQUIRED_COLUMNS: [&str; 4] = ["name", "protocol", "block_time_s", "hashrate_hs"];

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("dataset has no rows")]
    Empty,
    #[error("line {line}, column `{column}`: {message}")]
    Parse {
        line: u64,
        column: String,
        message: String,
    },
    #[error("line {line}: invalid {field}: {message}")]
    Validation {
        line: u64,
        field: String,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRow {
    pub params: CurrencyParams,
    pub expected_c_mu: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CurrencyDataset {
    pub rows: Vec<DatasetRow>,
    pub source_date: Option<String>,
    pub source_note: Option<String>,
}

impl CurrencyDataset {
    pub fn find(&self, name: &str) -> Option<&DatasetRow> {
        self.rows.iter().find(|r| r.params.name == name)
    }
}

pub fn table1() -> CurrencyDataset {
    parse_currency_dataset(TABLE1_CSV).expect("bundled table1 dataset is valid")
}

pub fn table2() -> CurrencyDataset {
    parse_currency_dataset(TABLE2_CSV).expect("bundled table2 dataset is valid")
}

pub fn load_currency_dataset(path: impl AsRef<Path>) -> Result<CurrencyDataset, DatasetError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_currency_dataset(&text)
}

fn parse_error(line: u64, column: &str, message: impl Into<String>) -> DatasetError {
    DatasetError::Parse {
        line,
        column: column.to_string(),
        message: message.into(),
    }
}

/// Parses a dot-decimal number; rejects comma decimals and stray text.
fn parse_number(text: &str, line: u64, column: &str) -> Result<f64, DatasetError> {
    let text = text.trim();
    if text.contains(',') {
        return Err(parse_error(line, column, format!("`{text}` uses a comma decimal separator")));
    }
    f64::from_str(text).map_err(|_| parse_error(line, column, format!("`{text}` is not a number")))
}

fn parse_block_time(text: &str, line: u64) -> Result<f64, DatasetError> {
    let column = "block_time_s";
    let trimmed = text.trim();
    let (number, scale) = if let Some(n) = trimmed.strip_suffix("min") {
        (n, 60.0)
    } else if let Some(n) = trimmed.strip_suffix('s') {
        (n, 1.0)
    } else {
        (trimmed, 1.0)
    };
    Ok(parse_number(number, line, column)? * scale)
}

pub fn parse_currency_dataset(text: &str) -> Result<CurrencyDataset, DatasetError> {
    let mut dataset = CurrencyDataset::default();
    for line in text.lines() {
        let Some(comment) = line.trim_start().strip_prefix('#') else {
            continue;
        };
        if let Some((key, value)) = comment.split_once(':') {
            match key.trim() {
                "source_date" => dataset.source_date = Some(value.trim().to_string()),
                "source_note" => dataset.source_note = Some(value.trim().to_string()),
                _ => {}
            }
        }
    }

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| parse_error(1, "header", e.to_string()))?
        .clone();
    if headers.is_empty() {
        return Err(DatasetError::Empty);
    }
    let index = |name: &str| headers.iter().position(|h| h == name);
    for required in REQUIRED_COLUMNS {
        if index(required).is_none() {
            return Err(parse_error(1, required, "missing column"));
        }
    }
    let col = |name: &str| index(name).expect("checked above");
    let expected_col = index("expected_c_mu");
    let note_col = index("note");

    let mut names = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_error(line, "record", e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| record.get(i).unwrap_or("");

        let name = field(col("name")).to_string();
        if name.is_empty() {
            return Err(parse_error(line, "name", "empty name"));
        }
        let protocol = Protocol::from_str(field(col("protocol")))
            .map_err(|msg| parse_error(line, "protocol", msg))?;
        let block_time = parse_block_time(field(col("block_time_s")), line)?;
        let hashrate = parse_number(field(col("hashrate_hs")), line, "hashrate_hs")?;
        let expected_c_mu = match expected_col.map(field).filter(|s| !s.is_empty()) {
            Some(text) => Some(parse_number(text, line, "expected_c_mu")?),
            None => None,
        };
        let note = note_col.map(field).filter(|s| !s.is_empty()).map(String::from);

        let params = CurrencyParams {
            name: name.clone(),
            protocol,
            block_time,
            hashrate,
        };
        params.validate().map_err(|e| DatasetError::Validation {
            line,
            field: match e {
                crate::pow::PowError::NonPositive { field, .. } => field.to_string(),
                _ => "hashrate x block_time".to_string(),
            },
            message: e.to_string(),
        })?;
        if !names.insert(name.clone()) {
            return Err(DatasetError::Validation {
                line,
                field: "name".into(),
                message: format!("duplicate currency `{name}`"),
            });
        }
        dataset.rows.push(DatasetRow {
            params,
            expected_c_mu,
            note,
        });
    }
    if dataset.rows.is_empty() {
        return Err(DatasetError::Empty);
    }
    Ok(dataset)
}

/// Names present in both datasets with differing parameters.
pub fn cross_table_duplicates(a: &CurrencyDataset, b: &CurrencyDataset) -> Vec<String> {
    a.rows
        .iter()
        .filter_map(|row| {
            let other = b.find(&row.params.name)?;
            (other.params.block_time != row.params.block_time
                || other.params.hashrate != row.params.hashrate)
                .then(|| row.params.name.clone())
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityRow {
    pub name: String,
    pub protocol: Protocol,
    pub block_time_s: f64,
    pub hashrate_hs: f64,
    pub c_mu: Option<ComplexityValue>,
    #[serde(rename = "expected_c_mu")]
    pub c_mu_printed: Option<f64>,
    pub golden_pass: Option<bool>,
    pub error: Option<String>,
}

impl ComplexityRow {
    pub fn failed(&self) -> bool {
        self.error.is_some() || self.golden_pass == Some(false)
    }
}

pub fn golden_matches(computed: f64, printed: f64) -> bool {
    if printed == 0.0 {
        return computed == 0.0;
    }
    ((computed - printed) / printed).abs() <= GOLDEN_RELATIVE_TOLERANCE
}

pub fn row_complexity(params: &CurrencyParams) -> Result<ComplexityValue, String> {
    match params.protocol {
        Protocol::PoW => pow_complexity(params).map_err(|e| e.to_string()),
        Protocol::PoS => pos_complexity(params).map_err(|e| e.to_string()),
        Protocol::Hybrid => hybrid_complexity(params).map_err(|e| e.to_string()),
    }
}

pub fn analyze_dataset(dataset: &CurrencyDataset) -> Vec<ComplexityRow> {
    dataset
        .rows
        .iter()
        .map(|row| {
            let p = &row.params;
            let (c_mu, error) = match row_complexity(p) {
                Ok(c) => (Some(c), None),
                Err(e) => (None, Some(e)),
            };
            let golden_pass = match (c_mu, row.expected_c_mu) {
                (Some(c), Some(printed)) => Some(golden_matches(c.bits(), printed)),
                _ => None,
            };
            ComplexityRow {
                name: p.name.clone(),
                protocol: p.protocol,
                block_time_s: p.block_time,
                hashrate_hs: p.hashrate,
                c_mu,
                c_mu_printed: row.expected_c_mu,
                golden_pass,
                error,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "text" | "txt" => Ok(Format::Text),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}`")),
        }
    }
}

fn sci3(v: f64) -> String {
    format!("{v:.2e}")
}

fn opt_full(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

pub fn render_table(rows: &[ComplexityRow], format: Format) -> String {
    match format {
        Format::Text => render_text(rows),
        Format::Csv => render_csv(rows),
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                rows: &'a [ComplexityRow],
            }
            let mut out = serde_json::to_string_pretty(&Doc { rows }).expect("rows serialize");
            out.push('\n');
            out
        }
    }
}

fn render_text(rows: &[ComplexityRow]) -> String {
    let golden = rows.iter().any(|r| r.c_mu_printed.is_some());
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(4).max(8);
    let mut out = String::new();
    let _ = write!(
        out,
        "{:<width$}  {:<8}  {:>10}  {:>10}  {:>10}",
        "currency", "protocol", "block_s", "hash/s", "C_mu"
    );
    if golden {
        let _ = write!(out, "  {:>10}  match", "printed");
    }
    out.push('\n');
    for r in rows {
        let c = match (&r.c_mu, &r.error) {
            (Some(c), _) => sci3(c.bits()),
            (None, _) => "error".to_string(),
        };
        let _ = write!(
            out,
            "{:<width$}  {:<8}  {:>10}  {:>10}  {:>10}",
            r.name,
            r.protocol.to_string(),
            r.block_time_s,
            sci3(r.hashrate_hs),
            c
        );
        if golden {
            let printed = r.c_mu_printed.map(sci3).unwrap_or_else(|| "-".into());
            let verdict = match r.golden_pass {
                Some(true) => "PASS",
                Some(false) => "FAIL",
                None => "-",
            };
            let _ = write!(out, "  {printed:>10}  {verdict}");
        }
        if let Some(e) = &r.error {
            let _ = write!(out, "  ({e})");
        }
        out.push('\n');
    }
    out
}

fn render_csv(rows: &[ComplexityRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "name",
        "protocol",
        "block_time_s",
        "hashrate_hs",
        "expected_c_mu",
        "c_mu",
        "golden_pass",
        "error",
    ])
    .expect("in-memory write");
    for r in rows {
        w.write_record([
            r.name.clone(),
            r.protocol.to_string(),
            r.block_time_s.to_string(),
            format!("{:e}", r.hashrate_hs),
            opt_full(r.c_mu_printed),
            opt_full(r.c_mu.map(|c| c.bits())),
            r.golden_pass.map(|b| b.to_string()).unwrap_or_default(),
            r.error.clone().unwrap_or_default(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8 csv")
}

/// Simulation report as pretty JSON, per-block CSV, or a text summary.
pub fn render_simulation(report: &SimulationReport, format: Format) -> String {
    match format {
        Format::Json => {
            let mut out = serde_json::to_string_pretty(report).expect("report serializes");
            out.push('\n');
            out
        }
        Format::Csv => {
            let mut out = String::from("block,interval_s\n");
            for (i, interval) in report.block_intervals.iter().enumerate() {
                let _ = writeln!(out, "{},{}", i + 1, interval);
            }
            out
        }
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "kind:        {:?}", report.kind);
            let _ = writeln!(out, "seed:        {}", report.seed);
            let _ = writeln!(out, "duration:    {} s", report.duration);
            let _ = writeln!(out, "blocks:      {}", report.blocks());
            if let Some(mean) = report.mean_interval(0) {
                let _ = writeln!(out, "mean block:  {mean:.3} s");
            }
            let _ = writeln!(out, "forks:       {}", report.fork_events);
            let _ = writeln!(out, "trials:      {}", report.trials);
            let _ = writeln!(out, "occupancy:");
            for (state, secs) in &report.state_occupancy {
                let _ = writeln!(out, "  {state:<14} {secs}");
            }
            let _ = writeln!(out, "wins:");
            for (who, wins) in &report.wins_per_account {
                let _ = writeln!(out, "  {who:<14} {wins}");
            }
            if let Ok(c) = empirical_complexity(report) {
                let _ = writeln!(out, "empirical C_mu: {:.6} bits", c.bits());
            }
            out
        }
    }
}

//! Line-oriented trace files and benchmark report output.
//!
//! A trace file stores one outcome series in a self-describing text
//! format:
//!
//! ```text
//! #fdrtrace v1
//! #ts=0.5
//! #count=4
//! #source=synthetic stationary seed=42
//! 1
//! 0
//! 1
//! 1
//! ```
//!
//! The first line is a fixed magic/version marker. Header lines follow as
//! `#key=value`; `count` is required and cross-checked against the data,
//! `ts` (seconds per attempt) and `source` are optional, and unknown keys
//! are ignored for forward compatibility. After the headers each
//! non-blank, non-comment line holds a single outcome, `1` for delivered
//! and `0` for lost. CRLF input is accepted; output is always LF.
//!
//! Reports are flat tables with one row per analyzed configuration,
//! writable as CSV (with a fixed header) or as JSON lines. Floats are
//! printed in Rust's shortest round-trip form, so reading a report back
//! reproduces the values bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{OutcomeSeries, DEFAULT_TS_SECONDS};
use crate::error::{Error, Result};
use crate::stats::Grade;

/// First line of every trace file.
pub const TRACE_MAGIC: &str = "#fdrtrace v1";

/// Write `series` in trace format.
pub fn write_trace<W: Write>(series: &OutcomeSeries, w: &mut W) -> Result<()> {
    writeln!(w, "{TRACE_MAGIC}")?;
    writeln!(w, "#ts={}", series.ts_seconds())?;
    writeln!(w, "#count={}", series.len())?;
    // The format is line-based; keep the free-form source label on one
    // line.
    let source = series.source_label().replace(['\n', '\r'], " ");
    writeln!(w, "#source={source}")?;
    for &b in series.as_slice() {
        w.write_all(if b == 1 { b"1\n" } else { b"0\n" })?;
    }
    Ok(())
}

/// Parse a trace into an externally sourced [`OutcomeSeries`].
pub fn read_trace<R: BufRead>(reader: R) -> Result<OutcomeSeries> {
    let mut lines = reader.lines();
    let first = match lines.next() {
        Some(line) => line?,
        None => {
            return Err(Error::TraceVersion {
                found: String::new(),
            })
        }
    };
    let first = first.trim_end_matches('\r');
    if first != TRACE_MAGIC {
        return Err(Error::TraceVersion {
            found: first.strip_prefix('#').unwrap_or(first).trim().to_string(),
        });
    }

    let mut ts: Option<f64> = None;
    let mut count: Option<usize> = None;
    let mut source: Option<String> = None;
    let mut outcomes: Vec<u8> = Vec::new();
    let mut in_header = true;
    let mut ln = 1usize;
    for line in lines {
        ln += 1;
        let line = line?;
        let trimmed = line.trim_end_matches('\r').trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            if in_header {
                if let Some((key, value)) = rest.split_once('=') {
                    let value = value.trim();
                    match key.trim() {
                        "ts" => {
                            let v: f64 = value.parse().map_err(|_| Error::TraceParse {
                                line: ln,
                                reason: format!("invalid ts value {value:?}"),
                            })?;
                            if !(v > 0.0 && v.is_finite()) {
                                return Err(Error::TraceParse {
                                    line: ln,
                                    reason: format!("ts must be positive, found {v}"),
                                });
                            }
                            ts = Some(v);
                        }
                        "count" => {
                            count = Some(value.parse().map_err(|_| Error::TraceParse {
                                line: ln,
                                reason: format!("invalid count value {value:?}"),
                            })?);
                        }
                        "source" => source = Some(value.to_string()),
                        _ => {}
                    }
                }
            }
            continue;
        }
        if in_header {
            in_header = false;
            outcomes.reserve(count.unwrap_or(0));
        }
        match trimmed {
            "0" => outcomes.push(0),
            "1" => outcomes.push(1),
            other => {
                return Err(Error::TraceParse {
                    line: ln,
                    reason: format!("expected 0 or 1, found {other:?}"),
                })
            }
        }
    }

    let declared = count.ok_or_else(|| Error::TraceParse {
        line: ln,
        reason: "missing #count=<n> header".to_string(),
    })?;
    if declared != outcomes.len() {
        return Err(Error::TraceCountMismatch {
            declared,
            actual: outcomes.len(),
        });
    }
    OutcomeSeries::from_external(
        outcomes,
        ts.unwrap_or(DEFAULT_TS_SECONDS),
        source.unwrap_or_else(|| "external".to_string()),
    )
}

/// Read a trace file from disk.
pub fn load_trace(path: &Path) -> Result<OutcomeSeries> {
    read_trace(BufReader::new(File::open(path)?))
}

/// Write a trace file to disk.
pub fn save_trace(series: &OutcomeSeries, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_trace(series, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Report serialization format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    JsonLines,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "jsonl" => Ok(ReportFormat::JsonLines),
            other => Err(Error::Config(format!(
                "unknown report format {other:?} (expected csv or jsonl)"
            ))),
        }
    }
}

impl std::fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ReportFormat::Csv => "csv",
            ReportFormat::JsonLines => "jsonl",
        })
    }
}

/// One analyzed configuration: the profile and filter settings, the
/// measured moments of both error processes, and their grades.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub profile: String,
    /// Nominal failure probability (series mean for external traces).
    pub eps0: f64,
    /// Oscillation amplitude; 0 for stationary or external sources.
    pub delta_eps: f64,
    /// Oscillation frequency in Hz; 0 for stationary or external sources.
    pub freq_hz: f64,
    /// Seconds per transmission attempt.
    pub ts: f64,
    pub m: usize,
    pub alpha: f64,
    /// Steps that entered the summaries.
    pub n_stats: u64,
    pub mu_e: f64,
    pub var_e: f64,
    pub mse_e: f64,
    pub theory_var_e: f64,
    pub mae_e: f64,
    pub grade_e: Grade,
    pub mu_d: f64,
    pub var_d: f64,
    pub mse_d: f64,
    pub theory_var_d: f64,
    pub mae_d: f64,
    pub grade_d: Grade,
}

/// CSV column order, also the JSON field order.
pub const REPORT_COLUMNS: [&str; 20] = [
    "profile",
    "eps0",
    "delta_eps",
    "freq_hz",
    "ts",
    "m",
    "alpha",
    "n_stats",
    "mu_e",
    "var_e",
    "mse_e",
    "theory_var_e",
    "mae_e",
    "grade_e",
    "mu_d",
    "var_d",
    "mse_d",
    "theory_var_d",
    "mae_d",
    "grade_d",
];

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl ReportRow {
    fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            csv_field(&self.profile),
            self.eps0,
            self.delta_eps,
            self.freq_hz,
            self.ts,
            self.m,
            self.alpha,
            self.n_stats,
            self.mu_e,
            self.var_e,
            self.mse_e,
            self.theory_var_e,
            self.mae_e,
            self.grade_e,
            self.mu_d,
            self.var_d,
            self.mse_d,
            self.theory_var_d,
            self.mae_d,
            self.grade_d,
        )
    }

    fn from_csv_fields(fields: &[String]) -> Result<Self> {
        if fields.len() != REPORT_COLUMNS.len() {
            return Err(Error::Config(format!(
                "report row has {} fields, expected {}",
                fields.len(),
                REPORT_COLUMNS.len()
            )));
        }
        let f64_at = |idx: usize| -> Result<f64> {
            fields[idx].parse().map_err(|_| {
                Error::Config(format!(
                    "invalid {} value {:?} in report",
                    REPORT_COLUMNS[idx], fields[idx]
                ))
            })
        };
        let grade_at = |idx: usize| -> Result<Grade> {
            fields[idx].parse().map_err(|_| {
                Error::Config(format!(
                    "invalid {} value {:?} in report",
                    REPORT_COLUMNS[idx], fields[idx]
                ))
            })
        };
        Ok(ReportRow {
            profile: fields[0].clone(),
            eps0: f64_at(1)?,
            delta_eps: f64_at(2)?,
            freq_hz: f64_at(3)?,
            ts: f64_at(4)?,
            m: fields[5]
                .parse()
                .map_err(|_| Error::Config(format!("invalid m value {:?} in report", fields[5])))?,
            alpha: f64_at(6)?,
            n_stats: fields[7].parse().map_err(|_| {
                Error::Config(format!("invalid n_stats value {:?} in report", fields[7]))
            })?,
            mu_e: f64_at(8)?,
            var_e: f64_at(9)?,
            mse_e: f64_at(10)?,
            theory_var_e: f64_at(11)?,
            mae_e: f64_at(12)?,
            grade_e: grade_at(13)?,
            mu_d: f64_at(14)?,
            var_d: f64_at(15)?,
            mse_d: f64_at(16)?,
            theory_var_d: f64_at(17)?,
            mae_d: f64_at(18)?,
            grade_d: grade_at(19)?,
        })
    }
}

/// Write rows in the requested format.
pub fn write_report<W: Write>(rows: &[ReportRow], format: ReportFormat, w: &mut W) -> Result<()> {
    match format {
        ReportFormat::Csv => {
            writeln!(w, "{}", REPORT_COLUMNS.join(","))?;
            for row in rows {
                writeln!(w, "{}", row.to_csv_line())?;
            }
        }
        ReportFormat::JsonLines => {
            for row in rows {
                let json = serde_json::to_string(row)
                    .map_err(|e| Error::Config(format!("serialize report row: {e}")))?;
                writeln!(w, "{json}")?;
            }
        }
    }
    Ok(())
}

/// Read rows back from either format.
pub fn read_report<R: BufRead>(format: ReportFormat, reader: R) -> Result<Vec<ReportRow>> {
    match format {
        ReportFormat::Csv => read_report_csv(reader),
        ReportFormat::JsonLines => {
            let mut rows = Vec::new();
            for line in reader.lines() {
                let line = line?;
                let trimmed = line.trim();
                if trimmed.is_empty() {
                    continue;
                }
                rows.push(
                    serde_json::from_str(trimmed)
                        .map_err(|e| Error::Config(format!("parse report row: {e}")))?,
                );
            }
            Ok(rows)
        }
    }
}

fn read_report_csv<R: BufRead>(reader: R) -> Result<Vec<ReportRow>> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(line) => line?,
        None => return Err(Error::Config("empty report".to_string())),
    };
    if header.trim_end_matches('\r') != REPORT_COLUMNS.join(",") {
        return Err(Error::Config(format!(
            "unexpected report header {header:?}"
        )));
    }
    let mut rows = Vec::new();
    for line in lines {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_csv_line(line)?;
        rows.push(ReportRow::from_csv_fields(&fields)?);
    }
    Ok(rows)
}

fn split_csv_line(line: &str) -> Result<Vec<String>> {
    let mut fields = Vec::new();
    let mut cur = String::new();
    let mut in_quotes = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        if in_quotes {
            if c == '"' {
                if chars.peek() == Some(&'"') {
                    cur.push('"');
                    chars.next();
                } else {
                    in_quotes = false;
                }
            } else {
                cur.push(c);
            }
        } else {
            match c {
                '"' => in_quotes = true,
                ',' => fields.push(std::mem::take(&mut cur)),
                _ => cur.push(c),
            }
        }
    }
    if in_quotes {
        return Err(Error::Config(format!(
            "unterminated quote in report line {line:?}"
        )));
    }
    fields.push(cur);
    Ok(fields)
}

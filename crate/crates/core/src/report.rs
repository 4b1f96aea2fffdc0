//! Report serialization.
//!
//! JSON keeps full precision so emitted reports parse back exactly. CSV and
//! console text use 12 significant digits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pipelines::{AggregateReport, RunReport};

/// Header of the aggregate CSV table.
pub const CSV_HEADER: [&str; 8] = ["graph", "task", "m", "fidelity", "p", "T", "d", "bound_ratio"];

/// `x` rounded to 12 significant digits, printed in shortest form.
pub fn sig12(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if rounded == 0.0 {
        "0".to_string()
    } else {
        rounded.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Format> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::ParameterOutOfRange(format!("unknown format {other:?}"))),
        }
    }
}

/// Anything that can be written as a report: JSON as a whole, CSV as rows.
pub trait Report: Serialize {
    fn rows(&self) -> &[RunReport];
}

impl Report for RunReport {
    fn rows(&self) -> &[RunReport] {
        std::slice::from_ref(self)
    }
}

impl Report for AggregateReport {
    fn rows(&self) -> &[RunReport] {
        &self.runs
    }
}

impl Report for Vec<RunReport> {
    fn rows(&self) -> &[RunReport] {
        self
    }
}

fn m_cell(r: &RunReport) -> String {
    match (r.m, r.target) {
        (Some(u), Some(v)) => format!("{u}->{v}"),
        (Some(m), None) => m.to_string(),
        _ => String::new(),
    }
}

pub fn write_csv(rows: &[RunReport], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.graph.family.clone(),
            r.task.to_string(),
            m_cell(r),
            sig12(r.fidelity),
            r.oracle_count.to_string(),
            sig12(r.total_time),
            r.depth.to_string(),
            sig12(r.bound_ratio),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_report(report: &(impl Report + ?Sized), format: Format, mut out: impl Write) -> Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, report)?;
            writeln!(out)?;
        }
        Format::Csv => write_csv(report.rows(), &mut out)?,
    }
    out.flush()?;
    Ok(())
}

pub fn emit_report(report: &(impl Report + ?Sized), format: Format, path: &Path) -> Result<()> {
    write_report(report, format, BufWriter::new(File::create(path)?))
}

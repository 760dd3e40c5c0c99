//! Report emission: a flat CSV with pinned columns and a JSON mirror.
//!
//! CSV contract: header `experiment,param_name,param_value,quantity,value,
//! target,tolerance,pass`, `.` decimal separator, LF line terminator. The
//! JSON format is an array of flat objects carrying the same records, so the
//! array length equals the CSV data-line count.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::ExperimentReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown output format '{other}'"))),
        }
    }
}

pub const CSV_HEADER: &str =
    "experiment,param_name,param_value,quantity,value,target,tolerance,pass";

fn format_num(v: f64) -> String {
    if v == 0.0 {
        "0.000000".to_string()
    } else if v.abs() >= 1e-3 && v.abs() < 1e9 {
        format!("{v:.6}")
    } else {
        format!("{v:.6e}")
    }
}

/// Render the report as CSV text (deterministic for a fixed report).
pub fn to_csv(report: &ExperimentReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.experiment,
            r.param_name,
            format_num(r.param_value),
            r.quantity,
            format_num(r.value),
            format_num(r.target),
            format_num(r.tolerance),
            r.pass
        ));
    }
    out
}

/// Render the report as a JSON array of flat row objects.
pub fn to_json(report: &ExperimentReport) -> Result<String> {
    serde_json::to_string_pretty(&report.rows)
        .map_err(|e| Error::Config(format!("json serialization failed: {e}")))
}

/// Write the report in the requested format to a writer.
pub fn emit_report(
    report: &ExperimentReport,
    format: OutputFormat,
    w: &mut impl Write,
) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => to_csv(report),
        OutputFormat::Json => to_json(report)?,
    };
    w.write_all(text.as_bytes())?;
    Ok(())
}

/// Write the report to a file path.
pub fn write_report(report: &ExperimentReport, format: OutputFormat, path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    emit_report(report, format, &mut file)
}

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::evaluate::EvalReport;
use super::train::MetricsRow;
use crate::{Error, Result};

/// `iteration,train_sum_rate,test_sum_rate,wall_ms`; a missing test rate is
/// left empty.
pub fn metrics_csv(rows: &[MetricsRow]) -> String {
    let mut out = String::from("iteration,train_sum_rate,test_sum_rate,wall_ms\n");
    for r in rows {
        let test = r.test_sum_rate.map(|v| v.to_string()).unwrap_or_default();
        writeln!(out, "{},{},{},{}", r.iteration, r.train_sum_rate, test, r.wall_ms).expect("string write");
    }
    out
}

/// `sample_id,sum_rate,forward_ms`.
pub fn report_csv(report: &EvalReport) -> String {
    let mut out = String::from("sample_id,sum_rate,forward_ms\n");
    for (i, (rate, ms)) in report.rates.iter().zip(&report.forward_ms).enumerate() {
        writeln!(out, "{i},{rate},{ms}").expect("string write");
    }
    out
}

pub fn write_metrics(path: impl AsRef<Path>, rows: &[MetricsRow]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, metrics_csv(rows)).map_err(|e| Error::io(path, e))
}

pub fn write_report(path: impl AsRef<Path>, report: &EvalReport) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, report_csv(report)).map_err(|e| Error::io(path, e))
}

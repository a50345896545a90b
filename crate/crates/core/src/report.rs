//! Result tables. Metric columns are multiplied by 1000, matching the
//! `x e-3` convention of published ESN tables.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::EvalReport;

pub const CSV_HEADER: [&str; 7] = ["topology", "n_l", "n_r", "ip", "rmse_e3", "nrmse_e3", "mape_e3"];

/// One evaluated configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub topology: String,
    pub n_l: usize,
    pub n_r: usize,
    pub ip: bool,
    pub report: EvalReport,
}

/// `v * 1000` with nine decimals and trailing zeros dropped.
pub fn scaled_e3(v: f64) -> String {
    let s = format!("{:.9}", v * 1000.0);
    if !s.contains('.') {
        return s;
    }
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

pub fn write_csv<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Data(format!("cannot write report: {e}"));
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.write_record([
            r.topology.clone(),
            r.n_l.to_string(),
            r.n_r.to_string(),
            r.ip.to_string(),
            scaled_e3(r.report.rmse),
            scaled_e3(r.report.nrmse),
            scaled_e3(r.report.mape),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Data(format!("cannot write report: {e}")))
}

/// Pretty JSON with per-run values included.
pub fn write_text<W: Write>(rows: &[ReportRow], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows).map_err(|e| Error::Data(format!("cannot write report: {e}")))?;
    writeln!(out).map_err(|e| Error::Data(format!("cannot write report: {e}")))
}

pub fn emit(rows: &[ReportRow], format: crate::config::OutputFormat, path: Option<&Path>) -> Result<()> {
    use crate::config::OutputFormat;
    match path {
        Some(p) => {
            let file = std::fs::File::create(p).map_err(|source| Error::Io { path: p.to_path_buf(), source })?;
            let buf = std::io::BufWriter::new(file);
            match format {
                OutputFormat::Csv => write_csv(rows, buf),
                OutputFormat::Text => write_text(rows, buf),
            }
        }
        None => {
            let stdout = std::io::stdout();
            match format {
                OutputFormat::Csv => write_csv(rows, stdout.lock()),
                OutputFormat::Text => write_text(rows, stdout.lock()),
            }
        }
    }
}

/// A parsed CSV row: configuration columns and the three scaled metrics.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct CsvRow {
    pub topology: String,
    pub n_l: usize,
    pub n_r: usize,
    pub ip: bool,
    pub rmse_e3: f64,
    pub nrmse_e3: f64,
    pub mape_e3: f64,
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| Error::Data(format!("bad report header: {e}")))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Data(format!("unexpected report header {header:?}")));
    }
    r.deserialize()
        .enumerate()
        .map(|(i, row)| row.map_err(|e| Error::Data(format!("report row {}: {e}", i + 2))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::RunMetrics;

    fn row(rmse: f64) -> ReportRow {
        let m = RunMetrics { rmse, nrmse: 0.132, mape: 1.5 };
        ReportRow {
            topology: "wide:3".into(),
            n_l: 3,
            n_r: 256,
            ip: true,
            report: EvalReport::from_runs(vec![m], 100).unwrap(),
        }
    }

    #[test]
    fn scaling_examples() {
        assert_eq!(scaled_e3(0.00722), "7.22");
        assert_eq!(scaled_e3(0.0202), "20.2");
        assert_eq!(scaled_e3(0.459), "459");
        assert_eq!(scaled_e3(0.0), "0");
        assert_eq!(scaled_e3(1e-13), "0");
    }

    #[test]
    fn empty_report_is_header_only() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "topology,n_l,n_r,ip,rmse_e3,nrmse_e3,mape_e3\n");
    }

    #[test]
    fn one_run_cell() {
        let mut buf = Vec::new();
        write_csv(&[row(0.00722)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "wide:3,3,256,true,7.22,132,1500");
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![row(0.012345678912), row(3.3e-5)];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        for (a, b) in rows.iter().zip(&back) {
            assert!((a.report.rmse * 1e3 - b.rmse_e3).abs() < 1e-9);
            assert!((a.report.nrmse * 1e3 - b.nrmse_e3).abs() < 1e-9);
            assert!((a.report.mape * 1e3 - b.mape_e3).abs() < 1e-9);
            assert_eq!((a.n_l, a.n_r, a.ip), (b.n_l, b.n_r, b.ip));
        }
    }

    #[test]
    fn text_is_json() {
        let mut buf = Vec::new();
        write_text(&[row(0.01)], &mut buf).unwrap();
        let back: Vec<ReportRow> = serde_json::from_slice(&buf).unwrap();
        assert_eq!(back, vec![row(0.01)]);
    }
}

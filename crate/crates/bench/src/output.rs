//! CSV and JSON writers shared by the subcommands.
//!
//! Floats in CSV are written with 17 significant digits in scientific
//! notation, so every value reads back exactly.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use ppa_core::lasso::format_f64;
use ppa_core::registry::StrategySettings;
use ppa_core::solver::IterationRecord;
use serde::{Deserialize, Serialize};

use crate::error::BenchError;

pub const TRACE_HEADER: &str = "k,phi,ire,drn,elapsed_s";
pub const SWEEP_HEADER: &str = "param_value,iters,cpu_s,ire,drn,phi";
pub const REPORT_HEADER: &str =
    "algo,iters,converged,cpu_seconds,factor_seconds,ire_final,drn_final,phi_final,kkt_residual_final";
pub const COMPARE_HEADER: &str =
    "tol,algo,status,iters,converged,cpu_s,factor_s,ire,drn,phi,phi_star,rel_obj_err,kkt_residual";

pub fn num(v: f64) -> String {
    format_f64(v)
}

/// Summary of one solve, as written by `solve` and read back by tools.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub algo: String,
    pub parameters: StrategySettings,
    pub iters: usize,
    pub converged: bool,
    pub cpu_seconds: f64,
    pub factor_seconds: f64,
    pub ire_final: f64,
    pub drn_final: f64,
    pub phi_final: f64,
    pub kkt_residual_final: f64,
}

impl RunReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.algo,
            self.iters,
            self.converged,
            num(self.cpu_seconds),
            num(self.factor_seconds),
            num(self.ire_final),
            num(self.drn_final),
            num(self.phi_final),
            num(self.kkt_residual_final)
        )
    }

    pub fn to_csv(&self) -> String {
        format!("{REPORT_HEADER}\n{}\n", self.csv_row())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report fields are finite");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Trace rows as CSV; with `zero_time` the elapsed column is written as 0.
pub fn trace_csv(records: &[IterationRecord], zero_time: bool) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in records {
        let elapsed = if zero_time { 0.0 } else { r.elapsed };
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.k,
            num(r.phi),
            num(r.ire),
            num(r.drn),
            num(elapsed)
        ));
    }
    out
}

#[derive(Serialize)]
struct TraceRow {
    k: usize,
    phi: f64,
    ire: f64,
    drn: f64,
    elapsed_s: f64,
}

pub fn trace_json(records: &[IterationRecord], zero_time: bool) -> String {
    let rows: Vec<TraceRow> = records
        .iter()
        .map(|r| TraceRow {
            k: r.k,
            phi: r.phi,
            ire: r.ire,
            drn: r.drn,
            elapsed_s: if zero_time { 0.0 } else { r.elapsed },
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&rows).expect("trace values are finite");
    s.push('\n');
    s
}

/// Writes to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, content: &str) -> Result<(), BenchError> {
    match path {
        Some(p) => write_file(p, content),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(content.as_bytes())
                .and_then(|_| lock.flush())
                .map_err(|e| BenchError::io(Path::new("<stdout>"), e))
        }
    }
}

pub fn write_file(path: &Path, content: &str) -> Result<(), BenchError> {
    let file = File::create(path).map_err(|e| BenchError::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(content.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| BenchError::io(path, e))
}

//! CSV writers. Reals use 17 significant digits; wall-clock times go to a
//! separate file so reports are byte-identical across reruns.

use std::fmt::Display;
use std::path::Path;

use super::CliError;
use crate::io::fmt_real;
use crate::oracles::InequalityMargin;
use crate::solver::TraceRow;

fn csv_error(path: &Path) -> impl FnOnce(csv::Error) -> CliError + '_ {
    move |source| CliError::Csv { path: path.to_path_buf(), source }
}

pub fn write_rows(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error(path))?;
    w.write_record(header).map_err(csv_error(path))?;
    for row in rows {
        w.write_record(row).map_err(csv_error(path))?;
    }
    w.flush().map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })
}

/// `scope,metric,value` rows.
#[derive(Default)]
pub struct TidyReport {
    rows: Vec<Vec<String>>,
}

impl TidyReport {
    pub fn text(&mut self, scope: &str, metric: &str, value: impl Display) {
        self.rows.push(vec![scope.to_string(), metric.to_string(), value.to_string()]);
    }

    pub fn real(&mut self, scope: &str, metric: &str, value: f64) {
        self.text(scope, metric, fmt_real(value));
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        write_rows(path, &["scope", "metric", "value"], &self.rows)
    }
}

pub fn write_trace(path: &Path, trace: &[TraceRow]) -> Result<(), CliError> {
    let rows: Vec<Vec<String>> = trace
        .iter()
        .map(|r| {
            vec![r.iteration.to_string(), fmt_real(r.eps), fmt_real(r.energy), fmt_real(r.grad_norm), fmt_real(r.step)]
        })
        .collect();
    write_rows(path, &["iteration", "eps", "energy", "grad_norm", "step"], &rows)
}

pub const ORACLE_HEADER: [&str; 7] = ["name", "seed", "samples", "lhs", "rhs", "margin", "witness"];

pub fn oracle_row(name: &str, samples: usize, m: &InequalityMargin) -> Vec<String> {
    let witness: Vec<String> = m.witness.iter().map(|&x| fmt_real(x)).collect();
    vec![
        name.to_string(),
        m.seed.to_string(),
        samples.to_string(),
        fmt_real(m.lhs),
        fmt_real(m.rhs),
        fmt_real(m.margin),
        witness.join(" "),
    ]
}

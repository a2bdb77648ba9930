//! Result rows, metadata and plot files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

/// One row of `results.csv`. Empty cells mark quantities a pipeline does not measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub experiment: &'static str,
    pub beta: f64,
    pub v: f64,
    pub mu: f64,
    pub k_requested: f64,
    pub k_snapped: f64,
    pub lambda: f64,
    pub epsilon: f64,
    pub delta_k_analytic: f64,
    pub advance_measured: Option<f64>,
    pub n1: f64,
    pub n2: f64,
    pub dx_pred: f64,
    pub dx_measured: Option<f64>,
    pub dx_over_eps2: Option<f64>,
    pub p_drift: f64,
    pub n_drift: f64,
    pub runtime_s: f64,
}

pub const COLUMNS: [&str; 18] = [
    "experiment",
    "beta",
    "v",
    "mu",
    "k_requested",
    "k_snapped",
    "lambda",
    "epsilon",
    "delta_k_analytic",
    "advance_measured",
    "n1",
    "n2",
    "dx_pred",
    "dx_measured",
    "dx_over_eps2",
    "p_drift",
    "n_drift",
    "runtime_s",
];

/// Units of each column, written to the metadata.
pub fn column_units() -> Vec<(&'static str, &'static str)> {
    let length = "length (hbar = m = g = 1)";
    let speed = "velocity (hbar = m = g = 1)";
    vec![
        ("experiment", "label"),
        ("beta", speed),
        ("v", speed),
        ("mu", "energy"),
        ("k_requested", "1/length"),
        ("k_snapped", "1/length"),
        ("lambda", length),
        ("epsilon", "normalized amplitude, N1 = epsilon^2"),
        ("delta_k_analytic", length),
        ("advance_measured", length),
        ("n1", "atom number"),
        ("n2", "atom number"),
        ("dx_pred", length),
        ("dx_measured", length),
        ("dx_over_eps2", length),
        ("p_drift", "relative"),
        ("n_drift", "relative"),
        ("runtime_s", "seconds (0 when timings are off)"),
    ]
}

/// Appends rows and flushes after each so finished points survive later failures.
pub struct RecordWriter {
    inner: csv::Writer<File>,
}

impl RecordWriter {
    pub fn create(path: &Path) -> anyhow::Result<Self> {
        let mut inner = csv::WriterBuilder::new()
            .has_headers(false)
            .from_path(path)?;
        inner.write_record(COLUMNS)?;
        inner.flush()?;
        Ok(Self { inner })
    }

    pub fn write(&mut self, record: &RunRecord) -> anyhow::Result<()> {
        self.inner.serialize(record)?;
        self.inner.flush()?;
        Ok(())
    }
}

/// Whitespace-separated two-column file.
pub fn write_columns(
    path: &Path,
    rows: impl IntoIterator<Item = (f64, f64)>,
) -> anyhow::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for (a, b) in rows {
        writeln!(w, "{a:.12e} {b:.12e}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> RunRecord {
        RunRecord {
            experiment: "soliton-shift",
            beta: 0.5,
            v: 0.5,
            mu: 1.0,
            k_requested: 1.0,
            k_snapped: 0.998,
            lambda: 12.0,
            epsilon: 0.1,
            delta_k_analytic: 1.2,
            advance_measured: None,
            n1: 0.01,
            n2: 0.004,
            dx_pred: 0.01,
            dx_measured: Some(0.0101),
            dx_over_eps2: Some(1.01),
            p_drift: 1e-11,
            n_drift: 1e-11,
            runtime_s: 0.0,
        }
    }

    #[test]
    fn header_matches_schema_and_units() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let mut w = RecordWriter::create(&path).unwrap();
        w.write(&row()).unwrap();
        drop(w);
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), COLUMNS.join(","));
        let cells: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(cells.len(), COLUMNS.len());
        assert_eq!(cells[9], "");
        let units: Vec<&str> = column_units().iter().map(|(c, _)| *c).collect();
        assert_eq!(units, COLUMNS);
    }
}

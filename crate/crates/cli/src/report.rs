//! Result rows shared by `compile` and `sweep`.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::Failure;

/// First line of every results file. Bump when columns change.
pub const SCHEMA: &str = "# emitforge-results v1";

#[derive(Clone, Debug, Default, Serialize)]
pub struct Row {
    pub graph_id: String,
    pub n: usize,
    pub family: String,
    pub method: String,
    pub ne_factor: f64,
    pub ne_min_total: Option<usize>,
    pub ne_limit: Option<usize>,
    pub k: Option<usize>,
    pub lc_len: Option<usize>,
    pub n_ee_cnot: Option<usize>,
    pub duration: Option<f64>,
    pub avg_t_loss: Option<f64>,
    pub survival: Option<f64>,
    pub peak_emitters: Option<usize>,
    pub source: String,
    pub status: String,
    /// Last so that rows compare equal across runs once it is stripped.
    pub wall_ms: u128,
}

/// Appends rows, writing the schema line and header only to a fresh file.
pub fn append(path: &Path, rows: &[Row]) -> Result<(), Failure> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let mut file: File = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Failure::io(path, e))?;
    if fresh {
        writeln!(file, "{SCHEMA}").map_err(|e| Failure::io(path, e))?;
    }
    let mut w = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    for r in rows {
        w.serialize(r).map_err(|e| Failure::io(path, e))?;
    }
    w.flush().map_err(|e| Failure::io(path, e))
}

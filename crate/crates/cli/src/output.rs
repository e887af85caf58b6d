//! Trace and summary export.
//!
//! CSV files start with a comment line naming the format version and the
//! column list, followed by a header record. Floats use the shortest
//! round-trip scientific formatting and inapplicable cells are empty, so identical runs
//! produce byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

/// Columns of the block Jacobi trace.
pub const RUN_COLUMNS: [&str; 14] = [
    "rep",
    "kind",
    "sweep",
    "k",
    "i",
    "j",
    "off_norm",
    "ratio",
    "window_ratio",
    "eta",
    "margin",
    "sigma_min",
    "ubc_applied",
    "bound_ok",
];

/// Format tag of the block Jacobi trace.
pub const RUN_FORMAT: &str = "bjlab-trace v1";

/// Columns of the J-Jacobi trace.
pub const JJACOBI_COLUMNS: [&str; 12] = [
    "kind",
    "sweep",
    "k",
    "i",
    "j",
    "factor",
    "pivot_ratio",
    "off_ratio",
    "orthogonality_deviation",
    "sigma_min",
    "frobenius_norm",
    "ubc_applied",
];

/// Format tag of the J-Jacobi trace.
pub const JJACOBI_FORMAT: &str = "bjlab-jtrace v1";

/// Columns of the operator-norm sample table.
pub const OPNORM_COLUMNS: [&str; 4] = ["sample", "norm", "mu", "excess"];

/// Format tag of the operator-norm sample table.
pub const OPNORM_FORMAT: &str = "bjlab-opnorm v1";

/// A CSV table built in memory.
pub struct Table {
    format: &'static str,
    columns: &'static [&'static str],
    writer: csv::Writer<Vec<u8>>,
    rows: usize,
}

impl Table {
    /// An empty table with the given format tag and columns.
    pub fn new(format: &'static str, columns: &'static [&'static str]) -> CliResult<Self> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(columns)?;
        Ok(Self { format, columns, writer, rows: 0 })
    }

    /// Appends one record, which must have one cell per column.
    pub fn push(&mut self, cells: &[Cell]) -> CliResult<()> {
        assert_eq!(cells.len(), self.columns.len(), "record width does not match the columns");
        self.writer.write_record(cells.iter().map(Cell::render))?;
        self.rows += 1;
        Ok(())
    }

    /// Number of data records.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// The complete file contents.
    pub fn into_bytes(self) -> CliResult<Vec<u8>> {
        let body = self.writer.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))?;
        let mut out = format!("# {} columns={}\n", self.format, self.columns.join(",")).into_bytes();
        out.extend(body);
        Ok(out)
    }
}

/// One CSV cell.
#[derive(Clone, Debug)]
pub enum Cell {
    Int(usize),
    Real(f64),
    Text(&'static str),
    Bool(bool),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => format!("{v:e}"),
            Cell::Text(s) => (*s).to_string(),
            Cell::Bool(b) => u8::from(*b).to_string(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Real)
    }
}

/// Creates the output directory if needed.
pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.to_path_buf(), source })
}

/// Writes `bytes` to `dir/name` and returns the path.
pub fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
    ensure_dir(dir)?;
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|source| CliError::Write { path: path.clone(), source })?;
    Ok(path)
}

/// Writes a pretty-printed JSON document followed by a newline.
pub fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> CliResult<PathBuf> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(dir, name, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_has_versioned_header() {
        let mut t = Table::new(OPNORM_FORMAT, &OPNORM_COLUMNS).unwrap();
        t.push(&[Cell::Int(0), Cell::Real(0.5), Cell::Real(0.75), Cell::Empty]).unwrap();
        let text = String::from_utf8(t.into_bytes().unwrap()).unwrap();
        assert_eq!(text, "# bjlab-opnorm v1 columns=sample,norm,mu,excess\nsample,norm,mu,excess\n0,5e-1,7.5e-1,\n");
    }
}

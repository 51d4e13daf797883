//! Tabular results and their CSV/JSON serialization.
//!
//! CSV output is built deterministically in memory: a header row followed
//! by one row per sweep coordinate, fields formatted with Rust's shortest
//! round-trip float formatting. Complex quantities appear as paired
//! `_re`/`_im` columns. The JSON summary carries run metadata (config
//! hash, version, wall time) next to the kind-specific results.

use std::fs;
use std::io::Write;
use std::path::Path;

/// One table cell.
#[derive(Clone, Debug)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    /// Rendered as an empty CSV field.
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Text(s) => escape_csv(s),
            Cell::Empty => String::new(),
        }
    }
}

fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v}")
    }
}

fn escape_csv(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Column-named result rows, ordered by sweep coordinate.
#[derive(Clone, Debug, Default)]
pub struct SweepResult {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl SweepResult {
    pub fn new(columns: Vec<String>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width does not match the header"
        );
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

/// Write `results.csv` and `summary.json` into the output directory.
pub fn write_outputs(
    out_dir: &Path,
    table: Option<&SweepResult>,
    summary: &serde_json::Value,
) -> std::io::Result<()> {
    fs::create_dir_all(out_dir)?;
    if let Some(table) = table {
        let mut file = fs::File::create(out_dir.join("results.csv"))?;
        file.write_all(table.to_csv().as_bytes())?;
    }
    let mut file = fs::File::create(out_dir.join("summary.json"))?;
    let text = serde_json::to_string_pretty(summary).expect("summary serialization");
    file.write_all(text.as_bytes())?;
    file.write_all(b"\n")?;
    Ok(())
}

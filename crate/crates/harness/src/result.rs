use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, HarnessResult};

/// One CSV cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Text(String),
}

/// Non-finite values become text (`NaN`, `inf`) so they survive JSON.
impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        if x.is_finite() {
            Cell::Num(x)
        } else {
            Cell::Text(x.to_string())
        }
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Num(x as f64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl Cell {
    /// Numeric value; text cells parse when they hold a number (`NaN`, `inf`).
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Text(s) => s.parse().ok(),
        }
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Num(x) => write!(f, "{x}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

/// Named rectangular table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width of table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[k]).collect())
    }

    /// Numeric column, row-aligned; non-numeric text reads as NaN.
    pub fn numbers(&self, name: &str) -> Option<Vec<f64>> {
        Some(self.column(name)?.into_iter().map(|c| c.as_f64().unwrap_or(f64::NAN)).collect())
    }

    /// Header row plus one newline-terminated line per row.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory csv");
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string())).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
    }
}

/// Run settings recorded with every result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub propagator_tol: f64,
    pub max_dim: usize,
    pub peak_prominence: f64,
    pub lindblad_step: f64,
    pub lindblad_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub engine: String,
    pub engine_version: String,
    pub tolerances: Tolerances,
    pub wall_time_s: f64,
    pub threads: usize,
    /// Modelling choices not fixed by the inputs themselves.
    pub assumptions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub experiment_id: String,
    pub inputs: serde_json::Value,
    /// The first table is the experiment's `data.csv`.
    pub outputs: Vec<Table>,
    pub provenance: Provenance,
}

impl ExperimentResult {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.outputs.iter().find(|t| t.name == name)
    }

    /// Writes `<root>/<experiment_id>/{data.csv, result.json, spec.json}`.
    pub fn write(&self, root: &Path) -> HarnessResult<PathBuf> {
        if self.outputs.is_empty() {
            return Err(HarnessError::Config(format!("experiment {} produced no output", self.experiment_id)));
        }
        let dir = root.join(&self.experiment_id);
        fs::create_dir_all(&dir).map_err(|e| HarnessError::io(&dir, e))?;
        let put = |name: &str, body: String| {
            let p = dir.join(name);
            fs::write(&p, body).map_err(|e| HarnessError::io(&p, e))
        };
        put("data.csv", self.outputs[0].to_csv())?;
        put("result.json", pretty(self))?;
        put("spec.json", pretty(&self.inputs))?;
        Ok(dir)
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("result values serialize");
    s.push('\n');
    s
}

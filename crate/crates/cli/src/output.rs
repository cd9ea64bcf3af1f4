use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
    Empty,
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

/// Reals use 17 significant digits.
pub fn format_cell(c: &Cell) -> String {
    match c {
        Cell::Int(v) => v.to_string(),
        Cell::Float(v) => format!("{v:.16e}"),
        Cell::Text(s) => s.clone(),
        Cell::Empty => String::new(),
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(format_cell).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

/// One output file.
pub enum Artifact {
    Csv(String, Table),
    Text(String, String),
}

impl Artifact {
    pub fn name(&self) -> &str {
        match self {
            Artifact::Csv(n, _) | Artifact::Text(n, _) => n,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let body = match self {
            Artifact::Csv(_, t) => t.to_csv(),
            Artifact::Text(_, s) => s.clone(),
        };
        std::fs::write(dir.join(self.name()), body)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PointSeed {
    pub indices: Vec<usize>,
    pub seed: u64,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub experiment: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub config_sha256: String,
    pub config: serde_json::Value,
    pub files: Vec<String>,
    pub point_seeds: Vec<PointSeed>,
    pub threads: usize,
    pub wall_time_seconds: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(format_cell(&Cell::Float(0.1)), "1.0000000000000001e-1");
        let s = format_cell(&Cell::Float(std::f64::consts::PI));
        assert_eq!(s.parse::<f64>().unwrap(), std::f64::consts::PI);
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(vec!["n", "x"]);
        t.push(vec![3usize.into(), 0.5.into()]);
        t.push(vec![4usize.into(), Cell::Empty]);
        assert_eq!(t.to_csv(), "n,x\n3,5.0000000000000000e-1\n4,\n");
    }
}

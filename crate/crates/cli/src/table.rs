//! Tabular output: CSV, JSON records and gnuplot scripts.

use std::fmt::Write as _;

use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(u64),
    Bool(bool),
}

impl Cell {
    /// Reals in scientific notation with 17 significant digits, so every
    /// value round-trips exactly.
    pub fn to_csv(self) -> String {
        match self {
            Cell::Real(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
        }
    }

    pub fn to_json(self) -> Value {
        match self {
            Cell::Real(v) => serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => Value::from(v),
            Cell::Bool(v) => Value::Bool(v),
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Cell::Real(v) => v,
            Cell::Int(v) => v as f64,
            Cell::Bool(v) => f64::from(u8::from(v)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i].as_f64()).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| c.to_csv()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn records(&self) -> Vec<Map<String, Value>> {
        self.rows
            .iter()
            .map(|row| self.columns.iter().cloned().zip(row.iter().map(|c| c.to_json())).collect())
            .collect()
    }

    /// A JSON array of flat objects, one per row.
    pub fn to_json(&self) -> String {
        let records: Vec<Value> = self.records().into_iter().map(Value::Object).collect();
        let mut s = serde_json::to_string_pretty(&Value::Array(records)).expect("plain values serialize");
        s.push('\n');
        s
    }
}

/// A gnuplot script plotting `y_columns` against `x_column` from a CSV file
/// given by its path relative to the script.
pub fn gnuplot_script(csv_name: &str, table: &Table, x_column: &str, y_columns: &[&str], title: &str) -> String {
    let col = |name: &str| table.column_index(name).map_or(0, |i| i + 1);
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set title '{title}'");
    let _ = writeln!(s, "set xlabel '{x_column}'");
    let _ = writeln!(s, "set grid");
    let plots: Vec<String> = y_columns
        .iter()
        .map(|y| format!("'{csv_name}' using {}:{} with lines title '{y}'", col(x_column), col(y)))
        .collect();
    let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    s
}

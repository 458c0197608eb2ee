//! Tabular datasets and their deterministic CSV/JSON serialization.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::Format;

/// One table cell. Non-finite numbers are never stored: they become
/// `Missing` and the row is flagged by its producer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Missing,
}

impl Cell {
    pub fn num(x: f64) -> Cell {
        if x.is_finite() {
            Cell::Num(x)
        } else {
            Cell::Missing
        }
    }

    pub fn text(s: impl Into<String>) -> Cell {
        Cell::Text(s.into())
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Num(x) => Some(x),
            Cell::Int(i) => Some(i as f64),
            _ => None,
        }
    }

    fn to_csv_field(&self) -> String {
        match self {
            Cell::Num(x) => ryu::Buffer::new().format_finite(*x).to_string(),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(x) => Value::from(*x),
            Cell::Int(i) => Value::from(*i),
            Cell::Bool(b) => Value::from(*b),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Missing => Value::Null,
        }
    }
}

/// Column names plus rows of equal length.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<Cell>> {
        let j = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[j].clone()).collect())
    }

    /// Unwrap a phase column along consecutive lines of `line` rows.
    /// Missing cells split a line into independently unwrapped segments.
    pub fn unwrap_column(&mut self, name: &str, line: usize) {
        let Some(j) = self.column_index(name) else { return };
        let line = line.max(1);
        let n = self.rows.len();
        let mut start = 0;
        while start < n {
            let end = (start + line).min(n);
            let mut k = start;
            while k < end {
                let seg_start = k;
                while k < end && self.rows[k][j].as_f64().is_some() {
                    k += 1;
                }
                if k > seg_start {
                    let vals: Vec<f64> = (seg_start..k).map(|r| self.rows[r][j].as_f64().unwrap()).collect();
                    for (r, v) in (seg_start..k).zip(rabi_core::model::unwrap_phases(&vals)) {
                        self.rows[r][j] = Cell::num(v);
                    }
                }
                k += 1;
            }
            start = end;
        }
    }
}

/// Write `table` preceded by `header`.
///
/// CSV: a `#`-prefixed single-line JSON header, a column row, then data.
/// JSON: `{"header": …, "columns": […], "rows": [[…], …]}`.
/// Floats use the shortest round-trip representation, so identical inputs
/// give byte-identical output.
pub fn write_table<W: Write>(mut w: W, header: &Value, table: &Table, format: Format) -> std::io::Result<()> {
    match format {
        Format::Csv => {
            writeln!(w, "# {}", serde_json::to_string(header)?)?;
            let mut cw = csv::Writer::from_writer(&mut w);
            cw.write_record(&table.columns)?;
            for row in &table.rows {
                cw.write_record(row.iter().map(Cell::to_csv_field))?;
            }
            cw.flush()?;
        }
        Format::Json => {
            let doc = serde_json::json!({
                "header": header,
                "columns": table.columns,
                "rows": table.rows.iter().map(|r| r.iter().map(Cell::to_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
            });
            serde_json::to_writer_pretty(&mut w, &doc)?;
            writeln!(w)?;
        }
    }
    w.flush()
}

/// Parsed CSV dataset: header JSON and the table as strings.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvDataset {
    pub header: Value,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvDataset {
    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j].as_str()).collect())
    }

    pub fn column_f64(&self, name: &str) -> Option<Vec<Option<f64>>> {
        Some(self.column(name)?.into_iter().map(|s| s.parse().ok()).collect())
    }
}

/// Read back a CSV dataset written by [`write_table`].
pub fn read_csv(text: &str) -> Result<CsvDataset, String> {
    let (first, rest) = text.split_once('\n').ok_or("empty dataset")?;
    let header_json = first.strip_prefix("# ").ok_or("missing header line")?;
    let header: Value = serde_json::from_str(header_json).map_err(|e| e.to_string())?;
    let mut reader = csv::Reader::from_reader(rest.as_bytes());
    let columns = reader.headers().map_err(|e| e.to_string())?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in reader.records() {
        rows.push(rec.map_err(|e| e.to_string())?.iter().map(String::from).collect());
    }
    Ok(CsvDataset { header, columns, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(vec!["x".into(), "label".into(), "flag".into(), "n".into()]);
        t.rows.push(vec![Cell::num(0.1), Cell::text("a,b"), Cell::Bool(true), Cell::Int(3)]);
        t.rows.push(vec![Cell::num(f64::NAN), Cell::text("c"), Cell::Bool(false), Cell::Int(-1)]);
        t
    }

    #[test]
    fn csv_round_trip() {
        let mut buf = Vec::new();
        let header = serde_json::json!({"tool": "rabi"});
        write_table(&mut buf, &header, &sample(), Format::Csv).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# {\"tool\":\"rabi\"}\n"));
        let ds = read_csv(&text).unwrap();
        assert_eq!(ds.header, header);
        assert_eq!(ds.column("label").unwrap(), vec!["a,b", "c"]);
        assert_eq!(ds.column_f64("x").unwrap(), vec![Some(0.1), None]);
    }

    #[test]
    fn json_layout() {
        let mut buf = Vec::new();
        write_table(&mut buf, &serde_json::json!({}), &sample(), Format::Json).unwrap();
        let v: Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["columns"][3], "n");
        assert_eq!(v["rows"][0][0], 0.1);
        assert!(v["rows"][1][0].is_null());
    }

    #[test]
    fn shortest_round_trip_floats() {
        let x = 0.1 + 0.2;
        let field = Cell::num(x).to_csv_field();
        assert_eq!(field, "0.30000000000000004");
        assert_eq!(field.parse::<f64>().unwrap(), x);
    }

    #[test]
    fn unwrapping_respects_lines_and_gaps() {
        let mut t = Table::new(vec!["g".into()]);
        for v in [3.0, -3.0, 3.1, 0.0, 3.0, -3.0] {
            t.rows.push(vec![Cell::num(v)]);
        }
        t.rows[3][0] = Cell::Missing;
        t.unwrap_column("g", 3);
        let g: Vec<Option<f64>> = t.rows.iter().map(|r| r[0].as_f64()).collect();
        let tau = 2.0 * std::f64::consts::PI;
        assert!((g[1].unwrap() - (tau - 3.0)).abs() < 1e-12);
        assert!((g[2].unwrap() - 3.1).abs() < 1e-12);
        assert_eq!(g[3], None);
        assert!((g[5].unwrap() - (tau - 3.0)).abs() < 1e-12);
    }
}

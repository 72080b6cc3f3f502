//! Tables and their CSV / JSON renderings.

use serde_json::{json, Map, Value};

use crate::config::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    /// Missing value; the table notes say why.
    Null,
}

impl Cell {
    /// Finite numbers as `Num`, anything else as `Null`.
    pub fn finite(x: f64) -> Cell {
        if x.is_finite() {
            Cell::Num(x)
        } else {
            Cell::Null
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::finite(x)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Null, Cell::finite)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub title: String,
    pub params: Vec<(String, String)>,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    pub notes: Vec<String>,
    pub diagnostics: Vec<(String, Cell)>,
}

impl Table {
    pub fn new(title: impl Into<String>) -> Self {
        Table {
            title: title.into(),
            ..Default::default()
        }
    }

    pub fn param(&mut self, key: impl Into<String>, value: impl ToString) {
        self.params.push((key.into(), value.to_string()));
    }

    pub fn column(&mut self, name: &str, unit: &str) {
        self.columns.push(Column {
            name: name.into(),
            unit: unit.into(),
        });
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn diagnostic(&mut self, key: &str, value: impl Into<Cell>) {
        self.diagnostics.push((key.into(), value.into()));
    }

    /// Copy keeping only the named columns, in the given order.
    pub fn select(&self, names: &[&str]) -> Table {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| {
                self.columns
                    .iter()
                    .position(|c| c.name == *n)
                    .unwrap_or_else(|| panic!("no column `{n}`"))
            })
            .collect();
        Table {
            columns: idx.iter().map(|&i| self.columns[i].clone()).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| idx.iter().map(|&i| r[i].clone()).collect())
                .collect(),
            ..self.clone()
        }
    }

    pub fn render(&self, format: Format, precision: usize) -> String {
        match format {
            Format::Csv => self.to_csv(precision),
            Format::Json => self.to_json(precision),
        }
    }

    pub fn to_csv(&self, precision: usize) -> String {
        let mut out = format!("# nfcav {}\n", self.title);
        for (k, v) in &self.params {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        for c in &self.columns {
            out.push_str(&format!("# column {} [{}]\n", c.name, c.unit));
        }
        for n in &self.notes {
            out.push_str(&format!("# note: {n}\n"));
        }
        let names: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        out.push_str(&names.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| csv_cell(c, precision)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        for (k, v) in &self.diagnostics {
            out.push_str(&format!("# {k} = {}\n", csv_cell(v, precision)));
        }
        out
    }

    pub fn to_json(&self, precision: usize) -> String {
        let mut params = Map::new();
        for (k, v) in &self.params {
            params.insert(k.clone(), Value::String(v.clone()));
        }
        let columns: Vec<Value> = self
            .columns
            .iter()
            .map(|c| json!({"name": c.name, "unit": c.unit}))
            .collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(|c| json_cell(c, precision)).collect()))
            .collect();
        let mut diag = Map::new();
        for (k, v) in &self.diagnostics {
            diag.insert(k.clone(), json_cell(v, precision));
        }
        let doc = json!({
            "command": self.title,
            "params": params,
            "columns": columns,
            "rows": rows,
            "notes": self.notes,
            "diagnostics": diag,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("tables always serialize");
        s.push('\n');
        s
    }
}

/// `precision` significant digits in scientific notation.
pub fn fmt_num(x: f64, precision: usize) -> String {
    if x == 0.0 {
        // Avoid a signed zero.
        return format!("{:.*e}", precision - 1, 0.0);
    }
    format!("{:.*e}", precision - 1, x)
}

fn csv_cell(c: &Cell, precision: usize) -> String {
    match c {
        Cell::Num(x) if x.is_finite() => fmt_num(*x, precision),
        Cell::Num(_) | Cell::Null => String::new(),
        Cell::Int(i) => i.to_string(),
        Cell::Text(s) => s.clone(),
    }
}

fn json_cell(c: &Cell, precision: usize) -> Value {
    match c {
        Cell::Num(x) if x.is_finite() => {
            let rounded: f64 = fmt_num(*x, precision).parse().expect("formatted float parses");
            json!(rounded)
        }
        Cell::Num(_) | Cell::Null => Value::Null,
        Cell::Int(i) => json!(i),
        Cell::Text(s) => json!(s),
    }
}

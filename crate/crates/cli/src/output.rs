use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use clumsy::harness::{csv_float, write_csv};
use serde_json::{json, Map, Value};

/// One table cell. Rationals travel as text `a/b`.
#[derive(Debug, Clone)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(n) => n.to_string(),
            Cell::Float(x) => csv_float(*x),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(n) => json!(n),
            // JSON has no NaN or infinity
            Cell::Float(x) if x.is_finite() => json!(x),
            Cell::Float(x) => json!(x.to_string()),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::Int(n)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// Result of one command: a flat table plus `key = value` notes.
#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub notes: Vec<(String, Cell)>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), ..Default::default() }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn note(&mut self, key: &str, value: impl Into<Cell>) {
        self.notes.push((key.to_string(), value.into()));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Who produced the output and with which inputs.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub argv: Vec<String>,
    pub seed: u64,
    pub mode: &'static str,
}

impl Provenance {
    pub fn header_line(&self) -> String {
        format!(
            "# clumsy {} mode={} seed={} argv={}",
            env!("CARGO_PKG_VERSION"),
            self.mode,
            self.seed,
            self.argv.join(" ")
        )
    }
}

pub fn emit(table: &Table, prov: &Provenance, format: Format, path: Option<&Path>) -> io::Result<()> {
    let mut out: Box<dyn Write> = match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match format {
        Format::Csv => {
            writeln!(out, "{}", prov.header_line())?;
            for (k, v) in &table.notes {
                writeln!(out, "# {k} = {}", v.csv())?;
            }
            write_csv(&mut out, &table.header, table.rows.iter().map(|r| r.iter().map(Cell::csv).collect()))?;
        }
        Format::Json => {
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|r| {
                    let obj: Map<String, Value> =
                        table.header.iter().zip(r).map(|(h, c)| (h.to_string(), c.json())).collect();
                    Value::Object(obj)
                })
                .collect();
            let notes: Map<String, Value> = table.notes.iter().map(|(k, v)| (k.clone(), v.json())).collect();
            let doc = json!({
                "provenance": {
                    "version": env!("CARGO_PKG_VERSION"),
                    "mode": prov.mode,
                    "seed": prov.seed,
                    "argv": prov.argv,
                },
                "notes": notes,
                "rows": rows,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("table serializes"))?;
        }
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_render() {
        assert_eq!(Cell::from(0.1).csv(), "0.1");
        assert_eq!(Cell::from(3u64).csv(), "3");
        assert_eq!(Cell::from("1/2").csv(), "1/2");
        assert_eq!(Cell::from(None::<f64>).csv(), "");
        assert_eq!(Cell::from(f64::NAN).json(), json!("NaN"));
    }

    #[test]
    fn header_carries_argv_and_seed() {
        let p = Provenance { argv: vec!["clumsy".into(), "pmf".into()], seed: 5, mode: "exact" };
        let line = p.header_line();
        assert!(line.starts_with("# clumsy "));
        assert!(line.contains("seed=5") && line.contains("argv=clumsy pmf") && line.contains("mode=exact"));
    }
}

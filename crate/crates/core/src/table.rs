//! Column-oriented curve tables and their CSV/JSON encodings.
//!
//! CSV layout: one header row, comma separated, `.` decimal point, numbers
//! written with 17 significant digits so they read back bit-exactly, and
//! `n/a` for cells without a value.

use serde_json::{json, Value};

use crate::error::{Error, Result};

pub const NOT_APPLICABLE: &str = "n/a";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Value(f64),
    NotApplicable,
    Label(String),
}

impl Cell {
    pub fn value(&self) -> Option<f64> {
        match self {
            Cell::Value(x) => Some(*x),
            _ => None,
        }
    }

    fn to_field(&self) -> String {
        match self {
            Cell::Value(x) => format_number(*x),
            Cell::NotApplicable => NOT_APPLICABLE.to_string(),
            Cell::Label(s) => s.clone(),
        }
    }

    fn parse(field: &str) -> Cell {
        let field = field.trim();
        if field == NOT_APPLICABLE {
            return Cell::NotApplicable;
        }
        match field.parse::<f64>() {
            Ok(x) => Cell::Value(x),
            Err(_) => Cell::Label(field.to_string()),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Value(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::NotApplicable, Cell::Value)
    }
}

/// 17 significant digits.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

/// Rows of samples whose first column is the shopper share `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl CurveTable {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::InvalidParameter(format!(
                "row has {} cells, table has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column_values(&self, index: usize) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r[index].value()).collect()
    }

    /// A table restricted to the first column plus `names`, in that order.
    pub fn select(&self, names: &[&str]) -> Result<CurveTable> {
        let mut indices = vec![0];
        for name in names {
            let i = self
                .column_index(name)
                .ok_or_else(|| Error::InvalidParameter(format!("no column named {name}")))?;
            indices.push(i);
        }
        Ok(CurveTable {
            columns: indices.iter().map(|&i| self.columns[i].clone()).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| indices.iter().map(|&i| r[i].clone()).collect())
                .collect(),
        })
    }

    /// At least two rows; the first column numeric and strictly increasing;
    /// every number finite.
    pub fn validate(&self) -> Result<()> {
        // data rows start on line 2 of the CSV encoding
        let bad = |row: usize, message: String| Error::MalformedTable {
            line: row as u64 + 2,
            message,
        };
        if self.columns.is_empty() {
            return Err(Error::MalformedTable {
                line: 1,
                message: "no columns".into(),
            });
        }
        if self.rows.len() < 2 {
            return Err(Error::MalformedTable {
                line: 1,
                message: format!("need at least 2 rows, found {}", self.rows.len()),
            });
        }
        let mut prev = f64::NEG_INFINITY;
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.columns.len() {
                return Err(bad(
                    i,
                    format!("expected {} cells, found {}", self.columns.len(), row.len()),
                ));
            }
            let Some(x) = row[0].value() else {
                return Err(bad(
                    i,
                    format!("first column must be numeric, found {:?}", row[0]),
                ));
            };
            // written negated so a NaN also fails
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(x > prev) {
                return Err(bad(
                    i,
                    format!(
                        "{} must be strictly increasing ({x} after {prev})",
                        self.columns[0]
                    ),
                ));
            }
            prev = x;
            if let Some(j) = row
                .iter()
                .position(|c| matches!(c, Cell::Value(v) if !v.is_finite()))
            {
                return Err(bad(
                    i,
                    format!("non-finite value in column {}", self.columns[j]),
                ));
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_field))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
    }

    /// Parses and validates a CSV table; errors carry the 1-based line.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let malformed = |e: csv::Error| Error::MalformedTable {
            line: e.position().map_or(1, |p| p.line()),
            message: e.to_string(),
        };
        let columns: Vec<String> = reader
            .headers()
            .map_err(malformed)?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        let mut table = CurveTable::new(columns);
        for record in reader.records() {
            let record = record.map_err(malformed)?;
            table.rows.push(record.iter().map(Cell::parse).collect());
        }
        table.validate()?;
        Ok(table)
    }

    /// `{"columns": [...], "rows": [[...], ...]}` with `null` for `n/a`.
    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                Value::Array(
                    r.iter()
                        .map(|c| match c {
                            Cell::Value(x) => json!(x),
                            Cell::NotApplicable => Value::Null,
                            Cell::Label(s) => json!(s),
                        })
                        .collect(),
                )
            })
            .collect();
        let doc = json!({ "columns": self.columns, "rows": rows });
        serde_json::to_string_pretty(&doc).expect("table serializes")
    }
}

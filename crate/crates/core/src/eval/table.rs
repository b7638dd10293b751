use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rows of named scores sharing the same columns, optionally followed by
/// an average row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub row_header: String,
    pub columns: Vec<String>,
    pub rows: Vec<(String, Vec<f64>)>,
}

/// Builds a table; with more than one row an `Average` row is appended.
pub fn compare_table(row_header: &str, columns: &[&str], rows: Vec<(String, Vec<f64>)>) -> Result<ScoreTable> {
    if rows.is_empty() {
        return Err(Error::Input("a table needs at least one row".into()));
    }
    if let Some((name, _)) = rows.iter().find(|(_, v)| v.len() != columns.len()) {
        return Err(Error::Shape(format!("row {} does not have {} values", name, columns.len())));
    }
    let mut rows = rows;
    if rows.len() > 1 {
        let n = rows.len() as f64;
        let avg = (0..columns.len()).map(|j| rows.iter().map(|(_, v)| v[j]).sum::<f64>() / n).collect();
        rows.push(("Average".to_string(), avg));
    }
    Ok(ScoreTable { row_header: row_header.to_string(), columns: columns.iter().map(|c| c.to_string()).collect(), rows })
}

impl ScoreTable {
    /// Fixed-width text with values as percentages to two decimals.
    pub fn to_text(&self) -> String {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|(name, v)| {
                std::iter::once(name.clone()).chain(v.iter().map(|x| format!("{:.2}%", 100.0 * x))).collect()
            })
            .collect();
        let header: Vec<String> = std::iter::once(self.row_header.clone()).chain(self.columns.iter().cloned()).collect();
        let widths: Vec<usize> = (0..header.len())
            .map(|j| cells.iter().map(|r| r[j].len()).chain([header[j].len()]).max().unwrap_or(0))
            .collect();
        let line = |r: &[String]| {
            let mut s = String::new();
            for (j, c) in r.iter().enumerate() {
                if j == 0 {
                    let _ = write!(s, "{:<w$}", c, w = widths[j]);
                } else {
                    let _ = write!(s, "  {:>w$}", c, w = widths[j]);
                }
            }
            s.push('\n');
            s
        };
        let mut out = line(&header);
        out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
        out.push('\n');
        for r in &cells {
            out.push_str(&line(r));
        }
        out
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(std::iter::once(self.row_header.as_str()).chain(self.columns.iter().map(String::as_str)))?;
        for (name, v) in &self.rows {
            let vals: Vec<String> = v.iter().map(|x| format!("{:.6}", x)).collect();
            w.write_record(std::iter::once(name.as_str()).chain(vals.iter().map(String::as_str)))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
    }
}

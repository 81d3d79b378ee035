use std::io::Write;
use std::path::Path;

use crate::error::{CliError, CliResult};

/// A numeric CSV with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn read(path: &Path) -> CliResult<Table> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_path(path).map_err(|e| CliError::io(path, e))?;
        let header: Vec<String> = rdr.headers().map_err(|e| CliError::io(path, e))?.iter().map(|h| h.trim().to_string()).collect();
        if header.iter().all(|h| h.is_empty()) {
            return Err(CliError::io(path, "missing header row"));
        }
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| CliError::io(path, format!("line {line}: {e}")))?;
            let row = rec
                .iter()
                .map(|s| {
                    let s = s.trim();
                    s.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| CliError::io(path, format!("line {line}: '{s}' is not a finite number")))
                })
                .collect::<CliResult<Vec<f64>>>()?;
            rows.push(row);
        }
        Ok(Table { header, rows })
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Splits off the response column; the rest become inputs in file order.
    pub fn split_target(&self, target: Option<&str>) -> CliResult<(Vec<String>, Vec<Vec<f64>>, Vec<f64>)> {
        if self.header.len() < 2 {
            return Err(CliError::Usage(format!("need at least two columns, found {}", self.header.len())));
        }
        let t = match target {
            Some(name) => self.column_index(name).ok_or_else(|| CliError::Usage(format!("no column named '{name}'")))?,
            None => self.header.len() - 1,
        };
        let names = self.header.iter().enumerate().filter(|(j, _)| *j != t).map(|(_, h)| h.clone()).collect();
        let x = self.rows.iter().map(|r| r.iter().enumerate().filter(|(j, _)| *j != t).map(|(_, v)| *v).collect()).collect();
        let y = self.rows.iter().map(|r| r[t]).collect();
        Ok((names, x, y))
    }

    pub fn write<W: Write>(&self, out: W) -> CliResult<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| CliError::io("<output>", e);
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|v| v.to_string())).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::io("<output>", e))
    }
}

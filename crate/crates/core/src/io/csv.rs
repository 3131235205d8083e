//! Plain CSV tables of reals with a header row.

use std::fmt::Write;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn to_csv_string(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            for (i, v) in r.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                // shortest representation that parses back to the same value
                let _ = write!(s, "{v:?}");
            }
            s.push('\n');
        }
        s
    }
}

pub fn write_csv(table: &CsvTable, path: impl AsRef<Path>) -> Result<()> {
    if let Some(r) = table.rows.iter().find(|r| r.len() != table.header.len()) {
        return Err(Error::Argument(format!(
            "row of {} values for {} columns",
            r.len(),
            table.header.len()
        )));
    }
    super::write_atomic(path.as_ref(), table.to_csv_string().as_bytes())
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<CsvTable> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Format(format!("{} is empty", path.display())))?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, l) in lines.enumerate().filter(|(_, l)| !l.is_empty()) {
        let r = l
            .split(',')
            .map(|w| w.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::Format(format!("{}: bad number on line {}", path.display(), i + 2)))?;
        rows.push(r);
    }
    Ok(CsvTable { header, rows })
}

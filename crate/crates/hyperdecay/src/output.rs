//! Report files: pretty JSON and CSV with 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::Result;

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json(value)?)?;
    Ok(())
}

pub fn csv_string(header: &str, rows: &[Vec<f64>]) -> String {
    let mut s = String::with_capacity(rows.len() * 48);
    s.push_str(header);
    s.push('\n');
    for row in rows {
        for (i, x) in row.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            let _ = write!(s, "{x:.16e}");
        }
        s.push('\n');
    }
    s
}

pub fn write_csv(path: &Path, header: &str, rows: &[Vec<f64>]) -> Result<()> {
    std::fs::write(path, csv_string(header, rows))?;
    Ok(())
}

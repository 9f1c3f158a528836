//! Numeric CSV ingestion.
//!
//! Comma-separated, '.' decimal point, at most one header row. The first row
//! is a header when any of its fields fails to parse as a number. Rows with
//! unparsable or non-finite values are rejected with their line number.

use std::path::Path;

use crate::failure::{CliResult, Failure};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Option<Vec<String>>,
    /// Row-major values, every row of the same width.
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn width(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// Resolve a column given by zero-based index or header name.
    pub fn column_index(&self, spec: &str) -> CliResult<usize> {
        let spec = spec.trim();
        if let Ok(i) = spec.parse::<usize>() {
            if i < self.width() {
                return Ok(i);
            }
            return Err(Failure::usage(format!("column {i} is out of range (table has {} columns)", self.width())));
        }
        self.header
            .as_ref()
            .and_then(|h| h.iter().position(|name| name == spec))
            .ok_or_else(|| Failure::usage(format!("no column named '{spec}'")))
    }

    pub fn column(&self, index: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[index]).collect()
    }

    /// Rows restricted to `columns`, in the given order.
    pub fn select(&self, columns: &[usize]) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| columns.iter().map(|&c| r[c]).collect()).collect()
    }
}

fn parse_field(field: &str) -> Option<f64> {
    field.trim().parse::<f64>().ok()
}

pub fn parse_csv(text: &str) -> CliResult<Table> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(text.as_bytes());
    let mut header = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Failure::usage(format!("malformed CSV: {e}")))?;
        let line = record.position().map_or(index as u64 + 1, |p| p.line());
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let parsed: Vec<Option<f64>> = record.iter().map(parse_field).collect();
        if index == 0 && header.is_none() && parsed.iter().any(Option::is_none) {
            header = Some(record.iter().map(|f| f.trim().to_string()).collect());
            continue;
        }
        let mut values = Vec::with_capacity(parsed.len());
        for (col, (v, raw)) in parsed.into_iter().zip(record.iter()).enumerate() {
            match v {
                Some(x) if x.is_finite() => values.push(x),
                _ => {
                    return Err(Failure::usage(format!(
                        "line {line}, column {col}: '{}' is not a finite number",
                        raw.trim()
                    )))
                }
            }
        }
        let expected = header.as_ref().map(Vec::len).or_else(|| rows.first().map(Vec::len));
        if let Some(w) = expected {
            if values.len() != w {
                return Err(Failure::usage(format!("line {line}: expected {w} fields, found {}", values.len())));
            }
        }
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(Failure::usage("input has no data rows"));
    }
    Ok(Table { header, rows })
}

/// Read and parse `path`, returning the table and the raw bytes for hashing.
pub fn read_csv(path: &Path) -> CliResult<(Table, Vec<u8>)> {
    let bytes = std::fs::read(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| Failure::usage(format!("{} is not valid UTF-8: {e}", path.display())))?;
    Ok((parse_csv(text)?, bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_detected() {
        let t = parse_csv("x,y\n1,2\n3,4.5\n").unwrap();
        assert_eq!(t.header, Some(vec!["x".into(), "y".into()]));
        assert_eq!(t.rows, vec![vec![1.0, 2.0], vec![3.0, 4.5]]);
        assert_eq!(t.column_index("y").unwrap(), 1);
        assert_eq!(t.column_index("0").unwrap(), 0);
        assert!(t.column_index("z").is_err());
        assert!(t.column_index("2").is_err());
    }

    #[test]
    fn headerless_input() {
        let t = parse_csv("1,2\n-3e2, 4\n").unwrap();
        assert_eq!(t.header, None);
        assert_eq!(t.column(0), vec![1.0, -300.0]);
    }

    #[test]
    fn bad_values_report_their_line() {
        let e = parse_csv("x\n1\nnan\n").unwrap_err();
        assert_eq!(e.code, 2);
        assert!(e.message.contains("line 3"), "{}", e.message);
        let e = parse_csv("1\n2\nabc\n").unwrap_err();
        assert!(e.message.contains("line 3"), "{}", e.message);
        assert!(parse_csv("1,2\n3\n").unwrap_err().message.contains("line 2"));
        assert!(parse_csv("inf\n").is_err());
        assert!(parse_csv("a,b\n").is_err());
    }

    #[test]
    fn select_reorders_columns() {
        let t = parse_csv("1,2,3\n4,5,6\n").unwrap();
        assert_eq!(t.select(&[2, 0]), vec![vec![3.0, 1.0], vec![6.0, 4.0]]);
    }
}

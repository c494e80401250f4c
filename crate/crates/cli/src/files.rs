//! CSV tables and atomic file output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use tempfile::NamedTempFile;

use crate::error::{CliError, Result};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = NamedTempFile::new_in(&dir).map_err(io_err(path))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.as_file().sync_all().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e.error })?;
    Ok(())
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(io_err(path))
}

pub fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(io_err(path))
}

/// Shortest representation that parses back to the same value.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NA".to_string()
    } else {
        format!("{v}")
    }
}

/// In-memory CSV table of strings.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Table { headers: headers.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| CliError::invalid(format!("csv encoding failed: {e}"));
        w.write_record(&self.headers).map_err(fail)?;
        for row in &self.rows {
            w.write_record(row).map_err(fail)?;
        }
        w.into_inner().map_err(|e| CliError::invalid(format!("csv encoding failed: {e}")))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_csv()?)
    }

    /// Reads a comma separated file with a header row. `lines` holds the
    /// source line of every row.
    pub fn read(path: &Path) -> Result<(Table, Vec<u64>)> {
        let file = fs::File::open(path).map_err(io_err(path))?;
        let mut r = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(file);
        let parse_err = |e: csv::Error| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            match e.into_kind() {
                csv::ErrorKind::Io(source) => CliError::Io { path: path.to_path_buf(), source },
                kind => CliError::Parse { path: path.to_path_buf(), line, message: format!("{kind:?}") },
            }
        };
        let headers: Vec<String> = r.headers().map_err(parse_err)?.iter().map(str::to_string).collect();
        if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
            return Err(CliError::Parse { path: path.to_path_buf(), line: 1, message: "missing header row".into() });
        }
        let mut table = Table { headers, rows: Vec::new() };
        let mut lines = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(parse_err)?;
            lines.push(rec.position().map(|p| p.line()).unwrap_or(0));
            table.rows.push(rec.iter().map(str::to_string).collect());
        }
        Ok((table, lines))
    }
}

fn parse_number(path: &Path, line: u64, field: &str, what: &str) -> Result<f64> {
    field.parse::<f64>().map_err(|_| CliError::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("invalid {what} {field:?}"),
    })
}

/// Numeric column `name` of a CSV file. `NA` cells are rejected.
pub fn read_column(path: &Path, name: &str) -> Result<Vec<f64>> {
    let (table, lines) = Table::read(path)?;
    let k = table.column_index(name).ok_or_else(|| CliError::Parse {
        path: path.to_path_buf(),
        line: 1,
        message: format!("no column {name:?}"),
    })?;
    table.rows.iter().zip(&lines).map(|(row, &line)| parse_number(path, line, &row[k], name)).collect()
}

/// Returns from column `x`.
pub fn read_returns(path: &Path) -> Result<Vec<f64>> {
    let x = read_column(path, "x")?;
    if x.is_empty() {
        return Err(CliError::invalid(format!("{}: no returns", path.display())));
    }
    Ok(x)
}

/// Closing prices from a `date,close` file with a header row. Dates must be
/// ISO `YYYY-MM-DD`.
pub fn read_prices(path: &Path) -> Result<Vec<f64>> {
    let (table, lines) = Table::read(path)?;
    if table.headers.len() != 2 {
        return Err(CliError::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("expected 2 columns (date, close), found {}", table.headers.len()),
        });
    }
    let mut prices = Vec::with_capacity(table.rows.len());
    for (row, &line) in table.rows.iter().zip(&lines) {
        NaiveDate::parse_from_str(&row[0], "%Y-%m-%d").map_err(|_| CliError::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("invalid date {:?}", row[0]),
        })?;
        let close = parse_number(path, line, &row[1], "close")?;
        if !(close > 0.0 && close.is_finite()) {
            return Err(CliError::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("non-positive price {close}"),
            });
        }
        prices.push(close);
    }
    Ok(prices)
}

/// Restart times (1-based) of the `i` column of a simulated path file.
pub fn read_truth(path: &Path) -> Result<Vec<usize>> {
    let i = read_column(path, "i")?;
    Ok(i.iter().enumerate().filter(|(_, &v)| v == 1.0).map(|(t, _)| t + 1).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![fmt_f64(0.1), "NA".into()]);
        t.push(vec![fmt_f64(-3e-12), fmt_f64(1.0 / 3.0)]);
        t.write(&path).unwrap();
        let (back, lines) = Table::read(&path).unwrap();
        assert_eq!(back, t);
        assert_eq!(lines, vec![2, 3]);
        assert_eq!(back.rows[1][1].parse::<f64>().unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn bad_price_names_its_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        fs::write(&path, "date,close\n2020-01-02,10\n2020-13-03,11\n").unwrap();
        match read_prices(&path) {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        fs::write(&path, "date,close\n2020-01-02,10\n2020-01-03,ten\n").unwrap();
        assert!(matches!(read_prices(&path), Err(CliError::Parse { line: 3, .. })));
        fs::write(&path, "date,close\n2020-01-02,10\n2020-01-03,0\n").unwrap();
        assert!(matches!(read_prices(&path), Err(CliError::Parse { line: 3, .. })));
    }
}

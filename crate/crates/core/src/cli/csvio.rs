//! CSV ingestion and the table layouts written by the commands.
//!
//! Input files hold one observation per row and one feature per column,
//! comma-separated, with an optional header row. Lines starting with `#`
//! are comments. Output files start with `#` comment lines carrying the
//! tool version, seed and configuration, then a header row. Floats are
//! written in shortest round-trip form.

use std::fmt::Write as _;
use std::path::Path;

use crate::data::DataMatrix;
use crate::distances::SquareMatrix;
use crate::localmap::LocalCorrMap;
use crate::simgen::SamplePair;

use super::CliError;

/// A parsed input table: optional header and row-major finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Option<Vec<String>>,
    pub columns: usize,
    pub rows: Vec<Vec<f64>>,
}

fn parse_cell(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok()
}

pub fn parse_table(text: &str, source: &str) -> Result<Table, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut header = None;
    let mut rows = Vec::new();
    let mut columns = 0;
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Input(format!("{source}: {e}")))?;
        if idx == 0 {
            columns = record.len();
            if record.iter().any(|c| parse_cell(c).is_none()) {
                header = Some(record.iter().map(str::to_string).collect());
                continue;
            }
        }
        let line = record.position().map_or(0, |p| p.line());
        let mut row = Vec::with_capacity(columns);
        for (col, cell) in record.iter().enumerate() {
            match parse_cell(cell) {
                Some(v) if v.is_finite() => row.push(v),
                _ => {
                    return Err(CliError::Input(format!(
                        "{source}: line {line}, column {}: '{cell}' is not a finite number",
                        col + 1
                    )))
                }
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Input(format!("{source}: no data rows")));
    }
    Ok(Table { header, columns, rows })
}

pub fn read_table(path: &Path) -> Result<Table, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_table(&text, &path.display().to_string())
}

impl Table {
    /// Resolves comma-separated selectors, each a header name or a 0-based
    /// column index.
    pub fn resolve(&self, selectors: &str) -> Result<Vec<usize>, CliError> {
        let mut out = Vec::new();
        for sel in selectors.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let by_name = self
                .header
                .as_ref()
                .and_then(|h| h.iter().position(|name| name == sel));
            let idx = match by_name {
                Some(i) => i,
                None => sel
                    .parse::<usize>()
                    .ok()
                    .filter(|&i| i < self.columns)
                    .ok_or_else(|| CliError::Input(format!("no column '{sel}' in a table of {} columns", self.columns)))?,
            };
            if out.contains(&idx) {
                return Err(CliError::Input(format!("column '{sel}' selected twice")));
            }
            out.push(idx);
        }
        if out.is_empty() {
            return Err(CliError::Input("empty column selection".into()));
        }
        Ok(out)
    }

    /// Selected columns as a feature-by-observation matrix.
    pub fn select(&self, cols: &[usize]) -> Result<DataMatrix, CliError> {
        let mut values = Vec::with_capacity(cols.len() * self.rows.len());
        for row in &self.rows {
            values.extend(cols.iter().map(|&c| row[c]));
        }
        Ok(DataMatrix::from_column_major(cols.len(), self.rows.len(), values)?)
    }
}

pub fn comment_preamble(config: &serde_json::Value) -> String {
    format!(
        "# mgc {}\n# seed {}\n# config {}\n",
        env!("CARGO_PKG_VERSION"),
        config.get("seed").map_or("none".to_string(), |s| s.to_string()),
        config
    )
}

/// `k,1,...,n` header, then one row per `k`.
pub fn map_csv(map: &LocalCorrMap) -> String {
    let n = map.n();
    let mut out = String::from("k");
    for l in 1..=n {
        let _ = write!(out, ",{l}");
    }
    out.push('\n');
    for k in 1..=n {
        let _ = write!(out, "{k}");
        for l in 1..=n {
            let _ = write!(out, ",{}", map.corr(k, l));
        }
        out.push('\n');
    }
    out
}

/// Reads a grid written by [`map_csv`] back into memory.
pub fn parse_map_csv(text: &str) -> Result<SquareMatrix<f64>, CliError> {
    let table = parse_table(text, "map")?;
    let n = table.rows.len();
    if table.columns != n + 1 {
        return Err(CliError::Input(format!(
            "map has {n} rows but {} value columns",
            table.columns.saturating_sub(1)
        )));
    }
    let mut values = Vec::with_capacity(n * n);
    for (k, row) in table.rows.iter().enumerate() {
        if row[0] != (k + 1) as f64 {
            return Err(CliError::Input(format!("map row {} is labelled {}", k + 1, row[0])));
        }
        values.extend_from_slice(&row[1..]);
    }
    Ok(SquareMatrix::from_vec(n, values)?)
}

/// `x1..xp,y1..yq` header, one observation per row.
pub fn sample_csv(pair: &SamplePair) -> String {
    let (p, q) = (pair.x.p(), pair.y.p());
    let names: Vec<String> = (1..=p)
        .map(|d| format!("x{d}"))
        .chain((1..=q).map(|d| format!("y{d}")))
        .collect();
    let mut out = names.join(",");
    out.push('\n');
    for (xo, yo) in pair.x.observations().zip(pair.y.observations()) {
        let cells: Vec<String> = xo.iter().chain(yo).map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Serializes records under a header row derived from their field names.
pub fn records_csv<T: serde::Serialize>(records: &[T]) -> Result<String, CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for r in records {
        writer
            .serialize(r)
            .map_err(|e| CliError::Output(e.to_string()))?;
    }
    let bytes = writer.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_detected() {
        let t = parse_table("a,b\n1,2\n3,4\n", "t").unwrap();
        assert_eq!(t.header.as_deref(), Some(&["a".to_string(), "b".to_string()][..]));
        assert_eq!(t.rows, vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        let t = parse_table("# note\n1, 2\n3,4\n", "t").unwrap();
        assert!(t.header.is_none());
        assert_eq!(t.rows.len(), 2);
    }

    #[test]
    fn rejects_non_finite_and_ragged() {
        assert!(parse_table("1,2\nnan,3\n", "t").is_err());
        assert!(parse_table("1,2\ninf,3\n", "t").is_err());
        assert!(parse_table("1,2\n3\n", "t").is_err());
        assert!(parse_table("a,b\n", "t").is_err());
        assert!(parse_table("1,2\n3,x\n", "t").is_err());
    }

    #[test]
    fn selectors() {
        let t = parse_table("a,b,c\n1,2,3\n", "t").unwrap();
        assert_eq!(t.resolve("c,0").unwrap(), vec![2, 0]);
        assert!(t.resolve("d").is_err());
        assert!(t.resolve("3").is_err());
        assert!(t.resolve("a,0").is_err());
        let x = t.select(&[0, 2]).unwrap();
        assert_eq!((x.p(), x.n()), (2, 1));
        assert_eq!(x.observation(0), &[1.0, 3.0]);
    }

    #[test]
    fn map_round_trip() {
        let mut m = SquareMatrix::filled(3, 0.0);
        m.set(1, 1, 1.0 / 3.0);
        m.set(2, 2, 0.1 + 0.2);
        m.set(2, 1, -1e-17);
        let map = LocalCorrMap::from_correlations(m.clone()).unwrap();
        let back = parse_map_csv(&map_csv(&map)).unwrap();
        assert_eq!(back, m);
    }
}

//! CSV ingestion.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::CliError;

/// Environment variable capping the number of data rows read from any CSV.
pub const MAX_N_VAR: &str = "MONOCAL_MAX_N";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub score: f64,
    pub target: f64,
    pub weight: f64,
    /// 1-based data row, header excluded.
    pub row: usize,
}

pub fn max_rows() -> Result<Option<usize>, CliError> {
    match std::env::var(MAX_N_VAR) {
        Err(_) => Ok(None),
        Ok(v) => v.trim().parse().map(Some).map_err(|_| {
            CliError::Input(format!(
                "{MAX_N_VAR} must be a non-negative integer, got {v:?}"
            ))
        }),
    }
}

fn open(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| CliError::Input(format!("cannot open {}: {e}", path.display())))
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input)
}

fn column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h == name)
}

fn parse_field(
    record: &csv::StringRecord,
    idx: usize,
    name: &str,
    row: usize,
) -> Result<f64, CliError> {
    let raw = record.get(idx).unwrap_or("");
    let value: f64 = raw
        .parse()
        .map_err(|_| CliError::Input(format!("row {row}: cannot parse {name} {raw:?}")))?;
    if value.is_nan() {
        return Err(CliError::Input(format!("row {row}: {name} is NaN")));
    }
    Ok(value)
}

/// Iterate data records, numbering rows and enforcing the size cap.
fn records<R: Read>(
    rdr: &mut csv::Reader<R>,
    mut each: impl FnMut(&csv::StringRecord, usize) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let cap = max_rows()?;
    let mut record = csv::StringRecord::new();
    let mut row = 0;
    loop {
        match rdr.read_record(&mut record) {
            Ok(false) => return Ok(()),
            Ok(true) => {}
            Err(e) => {
                return Err(CliError::Input(format!(
                    "row {}: malformed CSV: {e}",
                    row + 1
                )));
            }
        }
        row += 1;
        if cap.is_some_and(|cap| row > cap) {
            return Err(CliError::Input(format!(
                "input exceeds {MAX_N_VAR}={} rows",
                cap.unwrap_or_default()
            )));
        }
        each(&record, row)?;
    }
}

/// Rows of a `score,target[,weight]` file. A missing weight column means
/// unit weights.
pub fn read_training<R: Read>(input: R) -> Result<Vec<Row>, CliError> {
    let mut rdr = reader(input);
    let headers = rdr
        .headers()
        .map_err(|e| CliError::Input(format!("cannot read header: {e}")))?
        .clone();
    let missing = |name| CliError::Input(format!("header lacks a `{name}` column"));
    let score = column(&headers, "score").ok_or_else(|| missing("score"))?;
    let target = column(&headers, "target").ok_or_else(|| missing("target"))?;
    let weight = column(&headers, "weight");

    let mut rows = Vec::new();
    records(&mut rdr, |rec, row| {
        let weight = match weight {
            Some(i) => parse_field(rec, i, "weight", row)?,
            None => 1.0,
        };
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(CliError::Input(format!(
                "row {row}: weight must be positive and finite"
            )));
        }
        let target = parse_field(rec, target, "target", row)?;
        if !target.is_finite() {
            return Err(CliError::Input(format!("row {row}: target must be finite")));
        }
        rows.push(Row {
            score: parse_field(rec, score, "score", row)?,
            target,
            weight,
            row,
        });
        Ok(())
    })?;
    if rows.is_empty() {
        return Err(CliError::Input("input has no data rows".into()));
    }
    Ok(rows)
}

/// The `score` column of a file; other columns are ignored.
pub fn read_scores<R: Read>(input: R) -> Result<Vec<f64>, CliError> {
    let mut rdr = reader(input);
    let headers = rdr
        .headers()
        .map_err(|e| CliError::Input(format!("cannot read header: {e}")))?
        .clone();
    let score = column(&headers, "score")
        .ok_or_else(|| CliError::Input("header lacks a `score` column".into()))?;
    let mut out = Vec::new();
    records(&mut rdr, |rec, row| {
        out.push(parse_field(rec, score, "score", row)?);
        Ok(())
    })?;
    Ok(out)
}

pub fn training_file(path: &Path) -> Result<Vec<Row>, CliError> {
    read_training(open(path)?)
}

pub fn scores_file(path: &Path) -> Result<Vec<f64>, CliError> {
    read_scores(open(path)?)
}

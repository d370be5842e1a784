//! CSV files for matrices and measures.
//!
//! A matrix file has a header row of state labels followed by one row of
//! transition probabilities per state. A measure file has the header
//! `state,weight` and one `label,weight` row per state.

use std::io::{Read, Write};
use std::path::Path;

use super::matrix::StochasticMatrix;
use super::measure::Measure;
use crate::error::{Error, Result};

fn parse_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn parse_cell(path: &Path, row: usize, cell: &str) -> Result<f64> {
    cell.trim()
        .parse()
        .map_err(|_| parse_err(path, format!("row {row}: {cell:?} is not a number")))
}

pub fn read_matrix<R: Read>(reader: R, path: &Path) -> Result<StochasticMatrix> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let labels: Vec<String> = csv
        .headers()
        .map_err(|e| parse_err(path, e.to_string()))?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let record = record.map_err(|e| parse_err(path, e.to_string()))?;
        rows.push(
            record
                .iter()
                .map(|c| parse_cell(path, i + 1, c))
                .collect::<Result<Vec<f64>>>()?,
        );
    }
    if rows.len() != labels.len() {
        return Err(parse_err(
            path,
            format!("{} labels but {} rows", labels.len(), rows.len()),
        ));
    }
    StochasticMatrix::from_rows(rows)
        .and_then(|m| m.with_labels(labels))
        .map_err(|e| parse_err(path, e.to_string()))
}

pub fn load_matrix(path: &Path) -> Result<StochasticMatrix> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_matrix(file, path)
}

pub fn write_matrix<W: Write>(writer: W, p: &StochasticMatrix) -> std::io::Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record((0..p.n()).map(|i| p.label(i)))?;
    for row in p.rows() {
        csv.write_record(row.iter().map(|v| v.to_string()))?;
    }
    csv.flush()
}

pub fn save_matrix(path: &Path, p: &StochasticMatrix) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_matrix(file, p).map_err(|e| Error::io(path, e))
}

/// Reads a measure; returns the state labels alongside.
pub fn read_measure<R: Read>(reader: R, path: &Path) -> Result<(Vec<String>, Measure)> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let mut labels = Vec::new();
    let mut weights = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let record = record.map_err(|e| parse_err(path, e.to_string()))?;
        if record.len() != 2 {
            return Err(parse_err(
                path,
                format!("row {}: expected label,weight", i + 1),
            ));
        }
        labels.push(record[0].trim().to_string());
        weights.push(parse_cell(path, i + 1, &record[1])?);
    }
    let m = Measure::new(weights).map_err(|e| parse_err(path, e.to_string()))?;
    Ok((labels, m))
}

pub fn load_measure(path: &Path) -> Result<(Vec<String>, Measure)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_measure(file, path)
}

pub fn write_measure<W: Write>(writer: W, labels: &[String], m: &Measure) -> std::io::Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["state", "weight"])?;
    for (l, w) in labels.iter().zip(m.weights()) {
        csv.write_record([l.clone(), w.to_string()])?;
    }
    csv.flush()
}

use std::path::Path;

use mfm_core::experiments::galaxy;
use mfm_core::Dataset;

use crate::error::{CliError, Result};

/// Name that selects the bundled galaxy velocities instead of a file.
pub const GALAXY: &str = "galaxy";

/// Reads a rectangular numeric CSV into an `n × d` data set.
///
/// The first line is treated as a header when none of its cells is a
/// number. Cells may be padded with spaces.
pub fn ingest_csv(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_csv(&text, &path.display().to_string())
}

/// [`ingest_csv`] on text already in memory; `source` names it in errors.
pub fn parse_csv(text: &str, source: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 1;
        let record = record.map_err(|e| CliError::Input {
            path: source.to_string(),
            message: format!("line {line}: {e}"),
        })?;
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        if idx == 0 && record.iter().all(|c| c.parse::<f64>().is_err()) {
            width = Some(record.len());
            continue;
        }
        if let Some(w) = width {
            if record.len() != w {
                return Err(CliError::Data {
                    path: source.to_string(),
                    row: line,
                    column: record.len().min(w) + 1,
                    message: format!("expected {w} columns, found {}", record.len()),
                });
            }
        }
        width = Some(record.len());
        let mut row = Vec::with_capacity(record.len());
        for (j, cell) in record.iter().enumerate() {
            let data_err = |message: String| CliError::Data {
                path: source.to_string(),
                row: line,
                column: j + 1,
                message,
            };
            let v: f64 = cell
                .parse()
                .map_err(|_| data_err(format!("'{cell}' is not a number")))?;
            if !v.is_finite() {
                return Err(data_err(format!("'{cell}' is not finite")));
            }
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Input {
            path: source.to_string(),
            message: "no data rows".into(),
        });
    }
    Ok(Dataset::from_rows(&rows)?)
}

/// The bundled data set for [`GALAXY`], otherwise the CSV file at `spec`.
pub fn load_data(spec: &str) -> Result<Dataset> {
    if spec == GALAXY {
        return Ok(galaxy());
    }
    ingest_csv(Path::new(spec))
}

use std::fs;
use std::path::Path;

use classify_core::datasets;

use crate::error::{CliError, Result};

/// Where observations come from.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum DataSource {
    Bundled(String),
    File(String),
}

impl DataSource {
    /// `small10` and `galaxy` name bundled datasets; anything else is a path.
    pub fn parse(spec: &str) -> Self {
        match spec {
            "small10" | "galaxy" => DataSource::Bundled(spec.to_string()),
            other => DataSource::File(other.to_string()),
        }
    }

    pub fn label(&self) -> &str {
        match self {
            DataSource::Bundled(name) | DataSource::File(name) => name,
        }
    }
}

/// Read raw observations, then apply `scale`. Validation and sorting happen in
/// `prepare_dataset`.
pub fn ingest(source: &DataSource, column: Option<&str>, scale: Option<f64>) -> Result<Vec<f64>> {
    let mut values = match source {
        DataSource::Bundled(name) => datasets::bundled(name)
            .ok_or_else(|| CliError::Usage(format!("unknown bundled dataset {name:?}")))?,
        DataSource::File(path) => {
            let text = fs::read_to_string(Path::new(path)).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            match column {
                Some(col) => parse_csv_column(&text, col)?,
                None => parse_lines(&text)?,
            }
        }
    };
    if values.is_empty() {
        return Err(CliError::NoObservations);
    }
    if let Some(f) = scale {
        if !f.is_finite() || f == 0.0 {
            return Err(CliError::Usage(format!(
                "scale must be finite and non-zero, got {f}"
            )));
        }
        values.iter_mut().for_each(|v| *v *= f);
    }
    Ok(values)
}

/// One decimal number per line; blank lines are skipped.
pub fn parse_lines(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let v: f64 = t.parse().map_err(|_| CliError::Parse {
            line: i + 1,
            text: t.to_string(),
        })?;
        out.push(v);
    }
    Ok(out)
}

/// The named column of a headed CSV file. Line numbers count the header as line 1.
pub fn parse_csv_column(text: &str, column: &str) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let idx = reader
        .headers()?
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| CliError::MissingColumn(column.to_string()))?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = record.get(idx).unwrap_or("");
        if field.is_empty() {
            continue;
        }
        let v: f64 = field.parse().map_err(|_| CliError::Parse {
            line,
            text: field.to_string(),
        })?;
        out.push(v);
    }
    Ok(out)
}

//! Tabular samples and their CSV form: a header row of variable names, one
//! observation per row, decimal-point reals. Missing values are an input
//! error.

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("row {row}: expected {expected} fields, got {got}")]
    RaggedRow { row: usize, expected: usize, got: usize },
    #[error("row {row}, column `{column}`: missing or non-numeric value `{value}`")]
    BadValue { row: usize, column: String, value: String },
    #[error("dataset must have at least one column")]
    NoColumns,
}

/// Column-labelled numeric table. Column order is the declared variable
/// order; rows are complete (no missing values).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub labels: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn new(labels: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self, DatasetError> {
        if labels.is_empty() {
            return Err(DatasetError::NoColumns);
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != labels.len() {
                return Err(DatasetError::RaggedRow {
                    row: i + 1,
                    expected: labels.len(),
                    got: row.len(),
                });
            }
        }
        Ok(Self { labels, rows })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = self.labels.join(",");
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(|x| format!("{x}")).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv_str(text: &str) -> Result<Self, DatasetError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let labels: Vec<String> =
            reader.headers()?.iter().map(|h| h.to_string()).collect();
        if labels.is_empty() || labels.iter().all(|l| l.is_empty()) {
            return Err(DatasetError::NoColumns);
        }
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            if record.len() != labels.len() {
                return Err(DatasetError::RaggedRow {
                    row: i + 1,
                    expected: labels.len(),
                    got: record.len(),
                });
            }
            let mut row = Vec::with_capacity(labels.len());
            for (j, field) in record.iter().enumerate() {
                let value: f64 = field.parse().map_err(|_| DatasetError::BadValue {
                    row: i + 1,
                    column: labels[j].clone(),
                    value: field.to_string(),
                })?;
                if !value.is_finite() {
                    return Err(DatasetError::BadValue {
                        row: i + 1,
                        column: labels[j].clone(),
                        value: field.to_string(),
                    });
                }
                row.push(value);
            }
            rows.push(row);
        }
        Self::new(labels, rows)
    }

    pub fn read_csv(path: &Path) -> Result<Self, DatasetError> {
        Self::from_csv_str(&std::fs::read_to_string(path)?)
    }
}

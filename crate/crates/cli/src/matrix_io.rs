//! Channel-matrix files: a JSON object with integer `rows`/`cols`, a
//! row-of-rows `data` array and optional `labels`, or plain CSV rows with a
//! `.` decimal separator and no header unless asked for one. Probabilities
//! are written with 17 significant digits so round-trips are exact.

use crate::report::format_entry;
use esl_core::constructions::ChannelMatrix;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FileFormat {
    Json,
    Csv,
}

impl FileFormat {
    pub fn infer(path: &Path, explicit: Option<FileFormat>) -> FileFormat {
        explicit.unwrap_or_else(|| {
            match path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()) {
                Some(ext) if ext == "csv" => FileFormat::Csv,
                _ => FileFormat::Json,
            }
        })
    }
}

#[derive(Serialize, Deserialize)]
pub struct MatrixLabels {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct MatrixFile {
    rows: usize,
    cols: usize,
    data: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<MatrixLabels>,
}

#[derive(Debug)]
pub enum LoadError {
    Io(std::io::Error),
    Parse(String),
    Invalid(String),
}

pub fn write_matrix(
    path: &Path,
    m: &ChannelMatrix,
    format: FileFormat,
    labels: Option<MatrixLabels>,
    header: bool,
) -> Result<(), std::io::Error> {
    let bytes = match format {
        FileFormat::Json => {
            let file = MatrixFile {
                rows: m.rows(),
                cols: m.cols(),
                data: (0..m.rows()).map(|i| m.row(i).to_vec()).collect(),
                labels,
            };
            crate::report::to_json_bytes(&file)
                .map_err(std::io::Error::other)?
        }
        FileFormat::Csv => {
            let mut text = String::new();
            if header {
                let cols: Vec<String> = match &labels {
                    Some(l) => l.cols.clone(),
                    None => (1..=m.cols()).map(|j| format!("y{j}")).collect(),
                };
                text.push_str(&cols.join(","));
                text.push('\n');
            }
            for i in 0..m.rows() {
                let row: Vec<String> = m.row(i).iter().map(|&v| format_entry(v)).collect();
                text.push_str(&row.join(","));
                text.push('\n');
            }
            text.into_bytes()
        }
    };
    std::fs::write(path, bytes)
}

pub fn load_matrix(path: &Path, format: FileFormat) -> Result<ChannelMatrix, LoadError> {
    let raw = std::fs::read_to_string(path).map_err(LoadError::Io)?;
    let (rows, cols, data) = match format {
        FileFormat::Json => {
            let file: MatrixFile =
                serde_json::from_str(&raw).map_err(|e| LoadError::Parse(e.to_string()))?;
            let mut flat = Vec::with_capacity(file.rows * file.cols);
            for row in &file.data {
                flat.extend_from_slice(row);
            }
            (file.rows, file.cols, flat)
        }
        FileFormat::Csv => {
            let mut rows_data: Vec<Vec<f64>> = Vec::new();
            for (lineno, line) in raw.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let parsed: Result<Vec<f64>, _> =
                    line.split(',').map(|tok| tok.trim().parse::<f64>()).collect();
                match parsed {
                    Ok(row) => rows_data.push(row),
                    // a single non-numeric leading line is a header
                    Err(e) if lineno == 0 && rows_data.is_empty() => {
                        let _ = e;
                    }
                    Err(e) => {
                        return Err(LoadError::Parse(format!("line {}: {e}", lineno + 1)));
                    }
                }
            }
            let rows = rows_data.len();
            let cols = rows_data.first().map(|r| r.len()).unwrap_or(0);
            let mut flat = Vec::with_capacity(rows * cols);
            for row in &rows_data {
                if row.len() != cols {
                    return Err(LoadError::Parse("ragged rows".into()));
                }
                flat.extend_from_slice(row);
            }
            (rows, cols, flat)
        }
    };
    ChannelMatrix::new(rows, cols, data).map_err(|e| LoadError::Invalid(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use esl_core::constructions::matrix_m7;

    #[test]
    fn json_round_trip_is_exact() {
        let dir = std::env::temp_dir().join("esl-matrix-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("m7.json");
        let m = matrix_m7(0.3).unwrap();
        write_matrix(&path, &m, FileFormat::Json, None, false).unwrap();
        let back = load_matrix(&path, FileFormat::Json).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = std::env::temp_dir().join("esl-matrix-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        for header in [false, true] {
            let path = dir.join(format!("m7-{header}.csv"));
            let m = matrix_m7(1.0 / 3.0).unwrap();
            write_matrix(&path, &m, FileFormat::Csv, None, header).unwrap();
            let back = load_matrix(&path, FileFormat::Csv).unwrap();
            assert_eq!(m, back);
        }
    }
}

//! Deterministic data-file writers: CSV with full-precision floats and
//! pretty JSON, so that reruns of identical computations produce
//! identical bytes.

use nalgebra::DMatrix;
use serde::Serialize;
use std::fs;
use std::io;
use std::path::Path;

/// Full-precision float formatting: 18 significant digits round-trip any
/// f64 exactly, including infinities and NaN markers.
pub fn fmt(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{:.17e}", x)
    }
}

pub fn write_csv(path: &Path, header: &str, rows: &[Vec<String>]) -> io::Result<()> {
    let mut text = String::with_capacity(rows.len() * 64 + header.len() + 1);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(path, text)
}

/// Matrix CSV with a label column and labeled header row.
pub fn write_labeled_matrix(
    path: &Path,
    labels: &[String],
    m: &DMatrix<f64>,
) -> io::Result<()> {
    let header = std::iter::once("body".to_string())
        .chain(labels.iter().cloned())
        .collect::<Vec<_>>()
        .join(",");
    let rows: Vec<Vec<String>> = (0..m.nrows())
        .map(|i| {
            std::iter::once(labels[i].clone())
                .chain((0..m.ncols()).map(|j| fmt(m[(i, j)])))
                .collect()
        })
        .collect();
    write_csv(path, &header, &rows)
}

/// Raw (unlabeled) matrix CSV.
pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> io::Result<()> {
    let mut text = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| fmt(m[(i, j)])).collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(path, text)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)
}
